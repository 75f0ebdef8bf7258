#include "lshx/calc.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "lshx/detail/param_math.hpp"
#include "lshx/detail/xprec.hpp"

namespace lshx {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("to_chars failed");
    return std::string(buf, end);
}

void validate_probs(double p1, double p2) {
    if (!(p1 > 0.0) || !(p1 < 1.0) || !(p2 > 0.0) || !(p2 < 1.0)) {
        throw std::invalid_argument("probabilities must lie strictly between 0 and 1");
    }
    if (p2 > p1) throw std::invalid_argument("need p2 <= p1");
}

CountRow finish(CountRow row, mpz_class L, mpz_class H) {
    row.L = std::move(L);
    row.H = std::move(H);
    row.log2_h = detail::log2_of(row.H);
    return row;
}

}  // namespace

double rho(double p1, double p2) {
    if (!(p1 > 0.0) || !(p1 < 1.0) || !(p2 > 0.0) || !(p2 < 1.0)) {
        throw std::invalid_argument("rho: probabilities must lie strictly between 0 and 1");
    }
    if (!(p2 < p1)) throw std::invalid_argument("rho: requires p2 < p1");
    return std::log(1.0 / p1) / std::log(1.0 / p2);
}

CountRow scheme_counts(SchemeKind kind, uint64_t n, double p1, double p2,
                       const DeriveOverrides& overrides) {
    if (n < 2) throw std::invalid_argument("scheme_counts: n must be at least 2");
    validate_probs(p1, p2);
    uint64_t k = detail::derive_k_exact(n, p2);
    CountRow row;
    row.scheme = to_string(kind);
    row.n = n;
    row.p1 = p1;
    row.p2 = p2;
    row.k = k;
    switch (kind) {
        case SchemeKind::im: {
            detail::BigIm b = detail::im_big(k, p1);
            return finish(std::move(row), b.L, b.H);
        }
        case SchemeKind::ai: {
            detail::BigAi b = detail::ai_big(k, p1, overrides.tensor_t);
            row.aux = "t=" + std::to_string(b.t);
            return finish(std::move(row), b.L, b.H);
        }
        case SchemeKind::dkt: {
            double eps = overrides.dkt_eps.value_or(dkt_eps_theorem9);
            detail::BigDkt b = detail::dkt_big(k, p1, eps);
            row.aux = "eps=" + shortest(eps);
            return finish(std::move(row), b.L, b.H);
        }
        case SchemeKind::hybrid: {
            detail::BigHybrid b = detail::hybrid_big(k, p1, overrides.sketching);
            row.aux = "eps=" + shortest(b.eps);
            return finish(std::move(row), b.L, b.H);
        }
    }
    throw std::invalid_argument("unknown scheme kind");
}

CountRow corner_counts(uint64_t n, double p1, double p2) {
    if (n < 2) throw std::invalid_argument("corner_counts: n must be at least 2");
    validate_probs(p1, p2);
    detail::BigCorner b = detail::corner_big(n, p1, p2);
    CountRow row;
    row.scheme = "corner";
    row.n = n;
    row.p1 = p1;
    row.p2 = p2;
    row.k = b.k;
    row.aux = "tau=" + std::to_string(b.tau);
    return finish(std::move(row), b.L, b.H);
}

std::vector<CountRow> figure_table(uint64_t n, double p1, std::span<const double> p2_grid) {
    std::vector<CountRow> rows;
    rows.reserve(p2_grid.size() * 4);
    for (double p2 : p2_grid) {
        rows.push_back(scheme_counts(SchemeKind::im, n, p1, p2));
        rows.push_back(scheme_counts(SchemeKind::ai, n, p1, p2));
        rows.push_back(scheme_counts(SchemeKind::dkt, n, p1, p2));
        rows.push_back(corner_counts(n, p1, p2));
    }
    return rows;
}

namespace {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        quoted += c;
        if (c == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

}  // namespace

void write_csv(std::ostream& out, std::span<const CountRow> rows) {
    out << "scheme,n,p1,p2,k,aux,L,H,log2H\n";
    for (const CountRow& row : rows) {
        out << csv_quote(row.scheme) << ',' << row.n << ',' << shortest(row.p1) << ','
            << shortest(row.p2) << ',' << row.k << ',' << csv_quote(row.aux) << ','
            << row.L.get_str() << ',' << row.H.get_str() << ',' << shortest(row.log2_h) << '\n';
    }
}

}  // namespace lshx

#include "lshx/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lshx {

namespace {

uint64_t parse_u64(const std::string& token, const char* what) {
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw std::invalid_argument(std::string("dataset: bad ") + what + " '" + token + "'");
    }
    return v;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("dataset: empty input");

    std::istringstream hs(header);
    std::string hash, space_kv, size_kv;
    hs >> hash >> space_kv >> size_kv;
    if (hash != "#" || space_kv.rfind("space=", 0) != 0) {
        throw std::invalid_argument("dataset: header must be '# space=hamming d=<int>' or "
                                    "'# space=jaccard u=<int>'");
    }
    std::string space = space_kv.substr(6);

    Dataset ds;
    if (space == "hamming") {
        if (size_kv.rfind("d=", 0) != 0) throw std::invalid_argument("dataset: missing d=<int>");
        ds.kind = SpaceKind::hamming;
        ds.size_param = parse_u64(size_kv.substr(2), "dimension");
    } else if (space == "jaccard") {
        if (size_kv.rfind("u=", 0) != 0) throw std::invalid_argument("dataset: missing u=<int>");
        ds.kind = SpaceKind::jaccard;
        ds.size_param = parse_u64(size_kv.substr(2), "universe");
    } else {
        throw std::invalid_argument("dataset: unknown space '" + space + "'");
    }
    if (ds.size_param == 0) throw std::invalid_argument("dataset: space size must be positive");

    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (ds.kind == SpaceKind::hamming) {
            if (line.size() != ds.size_param) {
                throw std::invalid_argument("dataset line " + std::to_string(lineno) +
                                            ": expected " + std::to_string(ds.size_param) +
                                            " bits, got " + std::to_string(line.size()));
            }
            try {
                ds.hamming_points.push_back(hamming_point_from_bits(line));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": " +
                                            e.what());
            }
        } else {
            JaccardSet set;
            std::istringstream ls(line);
            std::string token;
            while (ls >> token) {
                uint64_t e = parse_u64(token, "set element");
                set.elems.push_back(static_cast<uint32_t>(e));
            }
            if (set.elems.empty()) {
                throw std::invalid_argument("dataset line " + std::to_string(lineno) +
                                            ": empty set");
            }
            uint32_t prev = 0;
            for (uint32_t e : set.elems) {
                if (e == 0 || e <= prev || e > ds.size_param) {
                    throw std::invalid_argument(
                        "dataset line " + std::to_string(lineno) +
                        ": elements must be strictly increasing integers in [1, " +
                        std::to_string(ds.size_param) + "]");
                }
                prev = e;
            }
            ds.jaccard_sets.push_back(std::move(set));
        }
    }
    return ds;
}

Dataset read_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("dataset: cannot open '" + path + "'");
    return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
    if (ds.kind == SpaceKind::hamming) {
        out << "# space=hamming d=" << ds.size_param << '\n';
        for (const HammingPoint& p : ds.hamming_points) {
            out << hamming_point_to_bits(p, ds.size_param) << '\n';
        }
    } else {
        out << "# space=jaccard u=" << ds.size_param << '\n';
        for (const JaccardSet& s : ds.jaccard_sets) {
            for (size_t i = 0; i < s.elems.size(); ++i) {
                if (i) out << ' ';
                out << s.elems[i];
            }
            out << '\n';
        }
    }
}

}  // namespace lshx

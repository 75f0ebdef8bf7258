// lshx command-line front end: parameter tables, index build/query, recall
// benchmarks and sketch evaluation over the text dataset format.
//
// Exit codes: 0 success, 2 usage or parse error, 3 runtime failure.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lshx/calc.hpp"
#include "lshx/dataset.hpp"
#include "lshx/index.hpp"
#include "lshx/oracle.hpp"
#include "lshx/schemes.hpp"
#include "lshx/sketch.hpp"

namespace {

using namespace lshx;

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

/// Sink for deterministic report output: --out file when given, else stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

template <typename Fn>
void with_family(const Dataset& ds, Fn&& fn) {
    if (ds.kind == SpaceKind::hamming) {
        fn(BitSamplingFamily(ds.size_param), ds.hamming_points);
    } else {
        fn(MinHashFamily(ds.size_param), ds.jaccard_sets);
    }
}

struct CommonOpts {
    uint64_t seed = 0;
    std::string out;
};

// ---------------------------------------------------------------------------
// params

struct ParamsOpts {
    uint64_t n = 0;
    double p1 = 0.0;
    std::optional<double> p2;
    std::string p2_grid;
    CommonOpts common;
};

std::vector<double> parse_grid(const std::string& spec) {
    double start = 0, end = 0, step = 0;
    char colon1 = 0, colon2 = 0;
    std::istringstream in(spec);
    in >> start >> colon1 >> end >> colon2 >> step;
    if (!in || colon1 != ':' || colon2 != ':' || !(step > 0.0) || end < start) {
        throw std::invalid_argument("bad grid '" + spec + "' (expected start:end:step)");
    }
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        double v = start + i * step;
        if (v > end + step * 1e-9) break;
        grid.push_back(v);
    }
    return grid;
}

void cmd_params(const ParamsOpts& o) {
    std::vector<double> grid;
    if (o.p2) {
        grid.push_back(*o.p2);
    } else if (!o.p2_grid.empty()) {
        grid = parse_grid(o.p2_grid);
    } else {
        throw std::invalid_argument("params: need --p2 or --p2-grid");
    }
    std::vector<CountRow> rows = figure_table(o.n, o.p1, grid);
    Output out(o.common.out);
    write_csv(out.stream(), rows);
}

// ---------------------------------------------------------------------------
// build

struct BuildOpts {
    std::string data;
    std::string scheme;
    double r1 = 0.0, r2 = 0.0;
    std::optional<uint64_t> tensor_t;
    std::optional<double> eps;
    bool sketch = false;
    CommonOpts common;
};

void cmd_build(const BuildOpts& o) {
    if (o.common.out.empty()) throw std::invalid_argument("build: --out is required");
    Dataset ds = read_dataset_file(o.data);
    SchemeKind kind = scheme_kind_from_string(o.scheme);
    with_family(ds, [&](auto family, const auto& points) {
        Sensitivity s = family.sensitivity(o.r1, o.r2);
        uint64_t n = std::max<uint64_t>(2, points.size());
        DeriveOverrides ov;
        ov.tensor_t = o.tensor_t;
        ov.dkt_eps = o.eps;
        ov.sketching = o.sketch;
        SchemeParams params = derive_params(kind, n, s, ov);
        auto source = build_source(family, params, o.common.seed);
        auto index = build_index(points, std::move(source), s);
        if (o.sketch) {
            SketchParams sp = derive_sketch_params(n, s);
            index.attach_sketches(detail::derive_seed(o.common.seed, 777, 0), sp);
        }
        std::ofstream out(o.common.out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + o.common.out + "'");
        index.serialize(out);
        std::cerr << "built " << to_string(kind) << " index over " << points.size()
                  << " points, L=" << index.table_count()
                  << ", H=" << index.source().function_count() << "\n";
    });
}

// ---------------------------------------------------------------------------
// query

struct QueryOpts {
    std::string index;
    std::string queries;
    bool sketch = false;
    CommonOpts common;
};

template <typename Family>
void run_queries(std::istream& in, const Dataset& qs, bool use_sketches, std::ostream& out) {
    auto index = NnIndex<Family>::deserialize(in);
    const auto& queries = [&]() -> const std::vector<typename Family::Point>& {
        if constexpr (std::is_same_v<Family, BitSamplingFamily>) {
            return qs.hamming_points;
        } else {
            return qs.jaccard_sets;
        }
    }();
    out << "qid\tresult\tdistance\tlookups\tdist_comps\tsketch_comps\thash_evals\n";
    for (size_t qi = 0; qi < queries.size(); ++qi) {
        QueryStats st;
        std::optional<uint32_t> res = use_sketches
                                          ? index.query_with_sketches(queries[qi], &st)
                                          : index.query(queries[qi], &st);
        out << qi << '\t';
        if (res) {
            double d = index.source().family().distance(queries[qi], index.point(*res));
            out << *res << '\t' << fixed6(d);
        } else {
            out << "-\t-";
        }
        out << '\t' << st.lookups << '\t' << st.distance_computations << '\t'
            << st.sketch_comparisons << '\t' << st.base_hash_evaluations << '\n';
    }
}

void cmd_query(const QueryOpts& o) {
    std::ifstream in(o.index, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index '" + o.index + "'");
    detail::expect_magic(in, "LSHX1\n", 6, "LSHX1 index");
    uint32_t tag = detail::read_u32(in);
    in.seekg(0);
    Dataset qs = read_dataset_file(o.queries);
    Output out(o.common.out);
    if (tag == BitSamplingFamily::space_tag) {
        if (qs.kind != SpaceKind::hamming) {
            throw std::invalid_argument("query file space does not match the index (hamming)");
        }
        run_queries<BitSamplingFamily>(in, qs, o.sketch, out.stream());
    } else if (tag == MinHashFamily::space_tag) {
        if (qs.kind != SpaceKind::jaccard) {
            throw std::invalid_argument("query file space does not match the index (jaccard)");
        }
        run_queries<MinHashFamily>(in, qs, o.sketch, out.stream());
    } else {
        throw std::runtime_error("index container: unknown space tag");
    }
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
    std::string data;
    std::string queries;
    double r1 = 0.0, r2 = 0.0;
    std::string scheme;
    uint64_t trials = 1;
    bool sketch = false;
    std::optional<uint64_t> tensor_t;
    std::optional<double> eps;
    unsigned jobs = 1;
    CommonOpts common;
};

struct TrialResult {
    uint64_t seed = 0;
    uint64_t successes = 0;
    uint64_t lookups = 0;
    uint64_t dist_comps = 0;
    uint64_t hash_evals = 0;
};

void cmd_bench(const BenchOpts& o) {
    auto t0 = std::chrono::steady_clock::now();
    Dataset ds = read_dataset_file(o.data);
    Dataset qs = read_dataset_file(o.queries);
    if (qs.kind != ds.kind || qs.size_param != ds.size_param) {
        throw std::invalid_argument("bench: query space does not match data space");
    }
    if (o.trials == 0) throw std::invalid_argument("bench: trials must be positive");
    SchemeKind kind = scheme_kind_from_string(o.scheme);

    with_family(ds, [&](auto family, const auto& points) {
        using Family = decltype(family);
        const auto& queries = [&]() -> const auto& {
            if constexpr (std::is_same_v<Family, BitSamplingFamily>) {
                return qs.hamming_points;
            } else {
                return qs.jaccard_sets;
            }
        }();
        if (queries.empty()) throw std::invalid_argument("bench: no queries");
        Sensitivity s = family.sensitivity(o.r1, o.r2);
        uint64_t n = std::max<uint64_t>(2, points.size());
        DeriveOverrides ov;
        ov.tensor_t = o.tensor_t;
        ov.dkt_eps = o.eps;
        ov.sketching = o.sketch;
        SchemeParams params = derive_params(kind, n, s, ov);

        // Ground truth per Definition 5: a query enters the success-rate
        // denominator iff some point lies within r1 of it.
        auto dist = [&](const auto& a, const auto& b) { return family.distance(a, b); };
        std::vector<bool> planted(queries.size());
        size_t planted_count = 0;
        for (size_t qi = 0; qi < queries.size(); ++qi) {
            auto hits = linear_scan(std::span(points), queries[qi], s.r1, dist);
            planted[qi] = !hits.empty();
            planted_count += planted[qi];
        }
        if (planted_count == 0) {
            std::cerr << "note: no query has ground truth within r1; "
                         "success rate is reported over zero queries\n";
        }

        SketchParams sp{64, 0.5, 0};
        if (o.sketch) sp = derive_sketch_params(n, s);

        std::vector<TrialResult> results(o.trials);
        auto run_trial = [&](uint64_t t) {
            TrialResult r;
            r.seed = detail::derive_seed(o.common.seed, 900, t);
            auto source = build_source(family, params, r.seed);
            auto index = build_index(points, std::move(source), s);
            if (o.sketch) {
                index.attach_sketches(detail::derive_seed(r.seed, 777, 0), sp);
            }
            for (size_t qi = 0; qi < queries.size(); ++qi) {
                QueryStats st;
                std::optional<uint32_t> res = o.sketch
                                                  ? index.query_with_sketches(queries[qi], &st)
                                                  : index.query(queries[qi], &st);
                r.lookups += st.lookups;
                r.dist_comps += st.distance_computations;
                r.hash_evals += st.base_hash_evaluations;
                if (res) {
                    double d = dist(queries[qi], index.point(*res));
                    if (!o.sketch && !(d < s.r2)) {
                        throw std::runtime_error("soundness violation: returned point at distance " +
                                                 fixed6(d));
                    }
                    if (planted[qi] && d < s.r2) ++r.successes;
                }
            }
            results[t] = r;
        };
        if (o.jobs <= 1) {
            for (uint64_t t = 0; t < o.trials; ++t) run_trial(t);
        } else {
            std::atomic<uint64_t> next{0};
            std::vector<std::thread> workers;
            unsigned count = std::min<unsigned>(o.jobs, std::thread::hardware_concurrency());
            for (unsigned w = 0; w < std::max(1u, count); ++w) {
                workers.emplace_back([&] {
                    for (uint64_t t; (t = next.fetch_add(1)) < o.trials;) run_trial(t);
                });
            }
            for (auto& th : workers) th.join();
        }

        uint64_t successes = 0, lookups = 0, dist_comps = 0, hash_evals = 0;
        for (const TrialResult& r : results) {
            successes += r.successes;
            lookups += r.lookups;
            dist_comps += r.dist_comps;
            hash_evals += r.hash_evals;
        }
        double nq = double(o.trials) * double(queries.size());
        Output out(o.common.out);
        std::ostream& os = out.stream();
        os << "scheme=" << to_string(kind) << " trials=" << o.trials
           << " queries=" << queries.size() << " planted_queries=" << planted_count
           << " sketch=" << (o.sketch ? 1 : 0) << "\n";
        os << "L=" << table_count(params) << " H=" << function_count(params) << "\n";
        if (planted_count > 0) {
            os << "success_rate="
               << fixed6(double(successes) / (double(o.trials) * double(planted_count))) << "\n";
        } else {
            os << "success_rate=-\n";
        }
        os << "mean_lookups=" << fixed6(double(lookups) / nq) << "\n";
        os << "mean_distance_computations=" << fixed6(double(dist_comps) / nq) << "\n";
        os << "mean_base_hash_evaluations=" << fixed6(double(hash_evals) / nq) << "\n";
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        std::cerr << "wall_time_s=" << fixed6(dt.count()) << "\n";
    });
}

// ---------------------------------------------------------------------------
// sketch-bench

struct SketchBenchOpts {
    std::string data;
    std::string queries;
    double r1 = 0.0, r2 = 0.0;
    uint64_t trials = 1;
    CommonOpts common;
};

void cmd_sketch_bench(const SketchBenchOpts& o) {
    auto t0 = std::chrono::steady_clock::now();
    Dataset ds = read_dataset_file(o.data);
    Dataset qs = read_dataset_file(o.queries);
    if (qs.kind != ds.kind || qs.size_param != ds.size_param) {
        throw std::invalid_argument("sketch-bench: query space does not match data space");
    }
    if (o.trials == 0) throw std::invalid_argument("sketch-bench: trials must be positive");
    with_family(ds, [&](auto family, const auto& points) {
        using Family = decltype(family);
        const auto& queries = [&]() -> const auto& {
            if constexpr (std::is_same_v<Family, BitSamplingFamily>) {
                return qs.hamming_points;
            } else {
                return qs.jaccard_sets;
            }
        }();
        if (queries.empty()) throw std::invalid_argument("sketch-bench: no queries");
        Sensitivity s = family.sensitivity(o.r1, o.r2);
        uint64_t n = std::max<uint64_t>(2, points.size());
        SketchParams sp = derive_sketch_params(n, s);

        uint64_t near_pairs = 0, far_pairs = 0, false_rejects = 0, false_accepts = 0;
        for (uint64_t t = 0; t < o.trials; ++t) {
            Sketcher<Family> sketcher(family, sp.b,
                                      detail::derive_seed(o.common.seed, 778, t));
            std::vector<Sketch> psk;
            psk.reserve(points.size());
            for (const auto& p : points) psk.push_back(sketcher.sketch(p));
            if (t == 0 && !o.common.out.empty()) {
                std::ofstream skout(o.common.out, std::ios::binary);
                if (!skout) throw std::runtime_error("cannot open '" + o.common.out + "'");
                write_sketch_file(skout, psk);
            }
            for (const auto& q : queries) {
                Sketch qsk = sketcher.sketch(q);
                for (size_t pi = 0; pi < points.size(); ++pi) {
                    double d = family.distance(q, points[pi]);
                    uint64_t sd = sketch_distance(qsk, psk[pi]);
                    if (d <= s.r1) {
                        ++near_pairs;
                        if (sd >= sp.theta) ++false_rejects;
                    } else if (d >= s.r2) {
                        ++far_pairs;
                        if (sd < sp.theta) ++false_accepts;
                    }
                }
            }
        }
        std::ostream& os = std::cout;  // --out carries the SKB1 payload, not the report
        os << "n=" << points.size() << " queries=" << queries.size() << " trials=" << o.trials
           << " b=" << sp.b << " lambda=" << fixed6(sp.lambda) << " theta=" << sp.theta << "\n";
        os << "near_pairs=" << near_pairs << " far_pairs=" << far_pairs << "\n";
        os << "false_reject_rate="
           << (near_pairs ? fixed6(double(false_rejects) / double(near_pairs)) : "-") << "\n";
        os << "false_accept_rate="
           << (far_pairs ? fixed6(double(false_accepts) / double(far_pairs)) : "-") << "\n";
        os << "hoeffding_bound=" << fixed6(hoeffding_bound(sp.b, s.p1, s.p2)) << "\n";
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        std::cerr << "wall_time_s=" << fixed6(dt.count()) << "\n";
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lshx: locality-sensitive hashing toolkit for the (r1,r2)-near neighbor problem"};
    app.require_subcommand(1);

    ParamsOpts po;
    CLI::App* params = app.add_subcommand("params", "emit scheme parameter tables as CSV");
    params->add_option("--n", po.n, "collection size")->required();
    params->add_option("--p1", po.p1, "near collision probability")->required();
    auto* p2opt = params->add_option("--p2", po.p2, "far collision probability");
    params->add_option("--p2-grid", po.p2_grid, "p2 grid as start:end:step")->excludes(p2opt);
    params->add_option("--seed", po.common.seed, "unused; accepted for uniformity");
    params->add_option("--out", po.common.out, "write CSV here instead of stdout");

    BuildOpts bo;
    CLI::App* build = app.add_subcommand("build", "build an index and write the LSHX1 container");
    build->add_option("--data", bo.data, "dataset file")->required();
    build->add_option("--scheme", bo.scheme, "im|ai|dkt|hybrid")->required();
    build->add_option("--r1", bo.r1, "near radius")->required();
    build->add_option("--r2", bo.r2, "far radius")->required();
    build->add_option("--t", bo.tensor_t, "pin tensoring t (ai)");
    build->add_option("--eps", bo.eps, "pin epsilon (dkt)");
    build->add_flag("--sketch", bo.sketch, "attach a 1-bit sketch layer");
    build->add_option("--seed", bo.common.seed, "build seed (default 0)");
    build->add_option("--out", bo.common.out, "output index path")->required();

    QueryOpts qo;
    CLI::App* query = app.add_subcommand("query", "run queries against a stored index");
    query->add_option("--index", qo.index, "LSHX1 index path")->required();
    query->add_option("--queries", qo.queries, "query dataset file")->required();
    query->add_flag("--sketch", qo.sketch, "screen candidates by sketch distance");
    query->add_option("--seed", qo.common.seed, "unused; accepted for uniformity");
    query->add_option("--out", qo.common.out, "write results here instead of stdout");

    BenchOpts eo;
    CLI::App* bench = app.add_subcommand("bench", "recall/work benchmark over build seeds");
    bench->add_option("--data", eo.data, "dataset file")->required();
    bench->add_option("--queries", eo.queries, "query dataset file")->required();
    bench->add_option("--r1", eo.r1, "near radius")->required();
    bench->add_option("--r2", eo.r2, "far radius")->required();
    bench->add_option("--scheme", eo.scheme, "im|ai|dkt|hybrid")->required();
    bench->add_option("--trials", eo.trials, "number of build seeds (default 1)");
    bench->add_flag("--sketch", eo.sketch, "query through the sketch layer");
    bench->add_option("--t", eo.tensor_t, "pin tensoring t (ai)");
    bench->add_option("--eps", eo.eps, "pin epsilon (dkt)");
    bench->add_option("--jobs", eo.jobs, "worker threads (results independent of scheduling)");
    bench->add_option("--seed", eo.common.seed, "master seed (default 0)");
    bench->add_option("--out", eo.common.out, "write the report here instead of stdout");

    SketchBenchOpts so;
    CLI::App* sbench = app.add_subcommand("sketch-bench", "sketch error rates vs the Hoeffding bound");
    sbench->add_option("--data", so.data, "dataset file")->required();
    sbench->add_option("--queries", so.queries, "query dataset file")->required();
    sbench->add_option("--r1", so.r1, "near radius")->required();
    sbench->add_option("--r2", so.r2, "far radius")->required();
    sbench->add_option("--trials", so.trials, "number of sketcher seeds (default 1)");
    sbench->add_option("--seed", so.common.seed, "master seed (default 0)");
    sbench->add_option("--out", so.common.out, "write trial-0 dataset sketches (SKB1) here");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(params)) cmd_params(po);
        if (app.got_subcommand(build)) cmd_build(bo);
        if (app.got_subcommand(query)) cmd_query(qo);
        if (app.got_subcommand(bench)) cmd_bench(eo);
        if (app.got_subcommand(sbench)) cmd_sketch_bench(so);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lshx/detail/io.hpp"
#include "lshx/families.hpp"
#include "lshx/schemes.hpp"
#include "lshx/sketch.hpp"

namespace lshx {

/// Per-query accounting. base_hash_evaluations counts evaluations of drawn
/// base-family functions by the hash source; distance_computations counts
/// true-distance candidate comparisons actually performed; lookups is the
/// 1-based index of the bucket where the query returned, or L on none.
struct QueryStats {
    uint64_t base_hash_evaluations = 0;
    uint64_t lookups = 0;
    uint64_t distance_computations = 0;
    uint64_t sketch_comparisons = 0;
    std::optional<uint32_t> returned;
};

namespace detail {

inline void write_point(std::ostream& out, const HammingPoint& p) {
    write_u64(out, p.words.size());
    for (uint64_t w : p.words) write_u64(out, w);
}

inline void read_point(std::istream& in, HammingPoint& p) {
    uint64_t n = read_u64(in);
    p.words.clear();
    p.words.reserve(n);
    for (uint64_t i = 0; i < n; ++i) p.words.push_back(read_u64(in));
}

inline void write_point(std::ostream& out, const JaccardSet& p) {
    write_u64(out, p.elems.size());
    for (uint32_t e : p.elems) write_u32(out, e);
}

inline void read_point(std::istream& in, JaccardSet& p) {
    uint64_t n = read_u64(in);
    p.elems.clear();
    p.elems.reserve(n);
    for (uint64_t i = 0; i < n; ++i) p.elems.push_back(read_u32(in));
}

inline void write_params(std::ostream& out, const SchemeParams& params) {
    switch (scheme_kind(params)) {
        case SchemeKind::im: {
            const auto& p = std::get<ImParams>(params);
            write_u32(out, 1);
            write_u64(out, p.k);
            write_u64(out, p.L);
            break;
        }
        case SchemeKind::ai: {
            const auto& p = std::get<AiParams>(params);
            write_u32(out, 2);
            write_u64(out, p.t);
            write_u64(out, p.k);
            write_u64(out, p.k1);
            write_u64(out, p.k2);
            write_u64(out, p.m1);
            write_u64(out, p.m2);
            write_u64(out, p.eta);
            write_f64(out, p.phi);
            write_u64(out, p.L);
            break;
        }
        case SchemeKind::dkt: {
            const auto& p = std::get<DktParams>(params);
            write_u32(out, 3);
            write_u64(out, p.k);
            write_u64(out, p.m);
            write_u64(out, p.L);
            write_f64(out, p.eps);
            break;
        }
        case SchemeKind::hybrid: {
            const auto& p = std::get<HybridParams>(params);
            write_u32(out, 4);
            write_u64(out, p.k);
            write_u64(out, p.k1);
            write_u64(out, p.k2);
            write_u64(out, p.m1);
            write_u64(out, p.m2);
            write_u64(out, p.L1);
            write_u64(out, p.L2);
            write_f64(out, p.eps);
            break;
        }
    }
}

inline SchemeParams read_params(std::istream& in) {
    uint32_t tag = read_u32(in);
    switch (tag) {
        case 1: {
            ImParams p;
            p.k = read_u64(in);
            p.L = read_u64(in);
            return p;
        }
        case 2: {
            AiParams p;
            p.t = read_u64(in);
            p.k = read_u64(in);
            p.k1 = read_u64(in);
            p.k2 = read_u64(in);
            p.m1 = read_u64(in);
            p.m2 = read_u64(in);
            p.eta = read_u64(in);
            p.phi = read_f64(in);
            p.L = read_u64(in);
            return p;
        }
        case 3: {
            DktParams p;
            p.k = read_u64(in);
            p.m = read_u64(in);
            p.L = read_u64(in);
            p.eps = read_f64(in);
            return p;
        }
        case 4: {
            HybridParams p;
            p.k = read_u64(in);
            p.k1 = read_u64(in);
            p.k2 = read_u64(in);
            p.m1 = read_u64(in);
            p.m2 = read_u64(in);
            p.L1 = read_u64(in);
            p.L2 = read_u64(in);
            p.eps = read_f64(in);
            return p;
        }
        default: throw std::runtime_error("index container: unknown scheme tag");
    }
}

}  // namespace detail

/// L hash tables over a single point store, answering (r1, r2)-near neighbor
/// queries by scanning buckets in order with early termination. Immutable
/// after build; queries are pure.
template <typename Family>
class NnIndex {
public:
    using Point = typename Family::Point;
    using DistanceFn = std::function<double(const Point&, const Point&)>;
    using Tables = std::vector<std::unordered_map<uint64_t, std::vector<uint32_t>>>;

    NnIndex(std::vector<Point> points, HashSource<Family> source, Sensitivity s,
            DistanceFn dist = {})
        : points_(std::move(points)),
          source_(std::move(source)),
          sens_(s),
          dist_(dist ? std::move(dist) : default_distance(source_.family())) {
        if (points_.size() > uint64_t(1) << 32) {
            throw std::invalid_argument("index: too many points");
        }
        tables_.resize(source_.table_count());
        std::vector<uint64_t> fps;
        uint64_t evals = 0;
        for (uint32_t id = 0; id < points_.size(); ++id) {
            source_.evaluate_all(points_[id], fps, evals);
            for (uint64_t l = 0; l < fps.size(); ++l) {
                tables_[l][fps[l]].push_back(id);
            }
        }
    }

    size_t size() const { return points_.size(); }
    const Point& point(uint32_t id) const { return points_.at(id); }
    const std::vector<Point>& points() const { return points_; }
    uint64_t table_count() const { return tables_.size(); }
    const Tables& tables() const { return tables_; }
    const HashSource<Family>& source() const { return source_; }
    const Sensitivity& sensitivity() const { return sens_; }
    bool has_sketches() const { return sketcher_.has_value(); }
    const SketchParams& sketch_params() const { return sketch_params_; }
    uint64_t sketcher_seed() const { return sketcher_ ? sketcher_->seed() : 0; }

    /// Scans buckets l = 1..L in order and returns the first stored point at
    /// true distance < r2 from q, or none.
    std::optional<uint32_t> query(const Point& q, QueryStats* stats = nullptr) const {
        QueryStats local;
        QueryStats& st = stats ? *stats : local;
        st = QueryStats{};
        std::vector<uint64_t> fps;
        source_.evaluate_all(q, fps, st.base_hash_evaluations);
        for (uint64_t l = 0; l < tables_.size(); ++l) {
            st.lookups = l + 1;
            auto it = tables_[l].find(fps[l]);
            if (it == tables_[l].end()) continue;
            for (uint32_t id : it->second) {
                ++st.distance_computations;
                if (dist_(q, points_[id]) < sens_.r2) {
                    st.returned = id;
                    return id;
                }
            }
        }
        st.lookups = tables_.size();
        return std::nullopt;
    }

    /// As query, but candidates are screened by sketch distance alone: a
    /// candidate is returned iff its sketch distance to s(q) is strictly
    /// below the threshold. No true-distance computations occur.
    std::optional<uint32_t> query_with_sketches(const Point& q, QueryStats* stats = nullptr) const {
        if (!sketcher_) {
            throw std::invalid_argument("index has no sketch layer attached");
        }
        QueryStats local;
        QueryStats& st = stats ? *stats : local;
        st = QueryStats{};
        std::vector<uint64_t> fps;
        source_.evaluate_all(q, fps, st.base_hash_evaluations);
        Sketch qs = sketcher_->sketch(q);
        for (uint64_t l = 0; l < tables_.size(); ++l) {
            st.lookups = l + 1;
            auto it = tables_[l].find(fps[l]);
            if (it == tables_[l].end()) continue;
            for (uint32_t id : it->second) {
                ++st.sketch_comparisons;
                if (sketch_distance(qs, point_sketches_[id]) < sketch_params_.theta) {
                    st.returned = id;
                    return id;
                }
            }
        }
        st.lookups = tables_.size();
        return std::nullopt;
    }

    /// Builds the sketch layer: draws a sketcher and sketches every stored
    /// point. The threshold used by query_with_sketches is params.theta.
    void attach_sketches(uint64_t sketcher_seed, const SketchParams& params) {
        sketcher_.emplace(source_.family(), params.b, sketcher_seed);
        sketch_params_ = params;
        point_sketches_.clear();
        point_sketches_.reserve(points_.size());
        for (const Point& p : points_) point_sketches_.push_back(sketcher_->sketch(p));
    }

    /// Versioned binary container; hash functions are re-derived from seeds,
    /// not serialized. Buckets are written sorted by fingerprint, so equal
    /// builds serialize byte-identically.
    void serialize(std::ostream& out) const {
        detail::write_magic(out, "LSHX1\n", 6);
        detail::write_u32(out, Family::space_tag);
        detail::write_u64(out, source_.family().space_size());
        detail::write_f64(out, sens_.r1);
        detail::write_f64(out, sens_.r2);
        detail::write_f64(out, sens_.p1);
        detail::write_f64(out, sens_.p2);
        detail::write_params(out, source_.params());
        detail::write_u64(out, source_.seed());
        detail::write_u8(out, sketcher_ ? 1 : 0);
        if (sketcher_) {
            detail::write_u64(out, sketcher_->seed());
            detail::write_u64(out, sketch_params_.b);
            detail::write_f64(out, sketch_params_.lambda);
            detail::write_u64(out, sketch_params_.theta);
        }
        detail::write_u64(out, points_.size());
        for (const Point& p : points_) detail::write_point(out, p);
        detail::write_u64(out, tables_.size());
        std::vector<std::pair<uint64_t, const std::vector<uint32_t>*>> buckets;
        for (const auto& table : tables_) {
            buckets.clear();
            buckets.reserve(table.size());
            for (const auto& [fp, ids] : table) buckets.emplace_back(fp, &ids);
            std::sort(buckets.begin(), buckets.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            detail::write_u64(out, buckets.size());
            for (const auto& [fp, ids] : buckets) {
                detail::write_u64(out, fp);
                detail::write_u64(out, ids->size());
                for (uint32_t id : *ids) detail::write_u32(out, id);
            }
        }
        if (!out) throw std::runtime_error("index container: write failed");
    }

    static NnIndex deserialize(std::istream& in) {
        detail::expect_magic(in, "LSHX1\n", 6, "LSHX1 index");
        uint32_t tag = detail::read_u32(in);
        if (tag != Family::space_tag) {
            throw std::runtime_error("index container: space does not match this family");
        }
        uint64_t space_size = detail::read_u64(in);
        double r1 = detail::read_f64(in);
        double r2 = detail::read_f64(in);
        double p1 = detail::read_f64(in);
        double p2 = detail::read_f64(in);
        Sensitivity sens(r1, r2, p1, p2);
        SchemeParams params = detail::read_params(in);
        uint64_t seed = detail::read_u64(in);
        bool has_sketches = detail::read_u8(in) != 0;
        uint64_t sketcher_seed = 0;
        SketchParams sp{64, 0.5, 0};
        if (has_sketches) {
            sketcher_seed = detail::read_u64(in);
            sp.b = detail::read_u64(in);
            sp.lambda = detail::read_f64(in);
            sp.theta = detail::read_u64(in);
        }
        uint64_t n = detail::read_u64(in);
        std::vector<Point> points(n);
        for (uint64_t i = 0; i < n; ++i) detail::read_point(in, points[i]);
        Family family(space_size);
        NnIndex idx(empty_tag{}, std::move(points),
                    HashSource<Family>(family, params, seed), sens);
        uint64_t L = detail::read_u64(in);
        if (L != idx.source_.table_count()) {
            throw std::runtime_error("index container: table count mismatch");
        }
        idx.tables_.resize(L);
        for (uint64_t l = 0; l < L; ++l) {
            uint64_t buckets = detail::read_u64(in);
            idx.tables_[l].reserve(buckets);
            for (uint64_t bkt = 0; bkt < buckets; ++bkt) {
                uint64_t fp = detail::read_u64(in);
                uint64_t count = detail::read_u64(in);
                auto& ids = idx.tables_[l][fp];
                ids.reserve(count);
                for (uint64_t i = 0; i < count; ++i) ids.push_back(detail::read_u32(in));
            }
        }
        if (has_sketches) idx.attach_sketches(sketcher_seed, sp);
        return idx;
    }

private:
    struct empty_tag {};

    // Deserialization constructor: tables are filled from the stream.
    NnIndex(empty_tag, std::vector<Point> points, HashSource<Family> source, Sensitivity s)
        : points_(std::move(points)),
          source_(std::move(source)),
          sens_(s),
          dist_(default_distance(source_.family())) {}

    static DistanceFn default_distance(const Family& family) {
        return [family](const Point& a, const Point& b) { return family.distance(a, b); };
    }

    std::vector<Point> points_;
    HashSource<Family> source_;
    Sensitivity sens_;
    DistanceFn dist_;
    Tables tables_;
    std::optional<Sketcher<Family>> sketcher_;
    SketchParams sketch_params_{64, 0.5, 0};
    std::vector<Sketch> point_sketches_;
};

/// Builds the L bucket maps over the collection; payloads are stored once,
/// buckets hold references.
template <typename Family>
NnIndex<Family> build_index(std::vector<typename Family::Point> points,
                            HashSource<Family> source, const Sensitivity& s,
                            typename NnIndex<Family>::DistanceFn dist = {}) {
    return NnIndex<Family>(std::move(points), std::move(source), s, std::move(dist));
}

}  // namespace lshx

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "lshx/families.hpp"

namespace lshx {

enum class SpaceKind : uint32_t { hamming = 1, jaccard = 2 };

/// Text-format point collection with dense ids (the position in the file).
/// Header line: `# space=hamming d=<int>` or `# space=jaccard u=<int>`; then
/// one point per line, Hamming as a {0,1} string of length d and Jaccard as
/// strictly increasing integers in [u].
struct Dataset {
    SpaceKind kind = SpaceKind::hamming;
    uint64_t size_param = 0;  // dimension d or universe u
    std::vector<HammingPoint> hamming_points;
    std::vector<JaccardSet> jaccard_sets;

    size_t size() const {
        return kind == SpaceKind::hamming ? hamming_points.size() : jaccard_sets.size();
    }
};

/// Parses the text format. Throws std::invalid_argument on malformed input
/// (usage-class error: the CLI maps it to exit code 2).
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);

void write_dataset(std::ostream& out, const Dataset& ds);

}  // namespace lshx

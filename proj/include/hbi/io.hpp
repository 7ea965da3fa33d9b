#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "hbi/alignment.hpp"
#include "hbi/matrix.hpp"
#include "hbi/objectives.hpp"

namespace hbi {

/// Binary matrix file: 16-byte header (magic "HBIM", u32 version = 1,
/// u32 rows, u32 cols, all little-endian) followed by rows*cols 32-bit
/// little-endian IEEE-754 values in row-major order.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& matrix);

/// Comma-separated values with 9 significant digits and LF line endings.
void write_csv(const std::filesystem::path& path, const Matrix& matrix);
Matrix read_csv(const std::filesystem::path& path);

/// Loads .csv by extension, anything else as a binary matrix file.
Matrix load_matrix_any(const std::filesystem::path& path);

/// Reads a matrix file expected to hold a single row or column.
Vector read_vector(const std::filesystem::path& path);

/// Synthetic game description for the banzhaf subcommand.
struct GameSpec {
    enum class Type { Similarity, Additive, Unanimity, Tabulated };
    Type type = Type::Similarity;
    std::vector<double> weights; // additive
    std::vector<int> required;   // unanimity
    int n = 0;                   // unanimity / tabulated universe size
    int modality_split = 0;
    std::uint64_t values_seed = 0; // tabulated
};

/// Parsed run configuration. Relative paths in the document resolve against
/// the directory containing the config file.
struct RunConfig {
    std::optional<std::filesystem::path> video_path;
    std::optional<std::filesystem::path> text_path;

    HierarchyConfig hierarchy;
    LossWeights loss_weights;
    GameSpec game;

    struct LevelLossPaths {
        std::optional<std::filesystem::path> pred;
        std::optional<std::filesystem::path> target;
        std::optional<std::filesystem::path> scores;
    };
    std::array<LevelLossPaths, 3> loss_paths{};
    double task_loss = 0.0;

    static RunConfig load(const std::filesystem::path& path);
};

} // namespace hbi

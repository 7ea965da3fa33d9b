#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hbi/error.hpp"
#include "hbi/matrix.hpp"

namespace hbi {

/// Player universe for a cooperative game. Players [0, modality_split) are
/// video tokens, players [modality_split, n) are text tokens; the split may
/// be 0 or n for single-modality games.
struct PlayerSet {
    int n = 0;
    int modality_split = 0;

    int video_count() const { return modality_split; }
    int text_count() const { return n - modality_split; }
    void validate() const;
};

/// Subset of the player universe, stored as a bitset.
class Coalition {
public:
    explicit Coalition(int universe_size);
    Coalition(int universe_size, std::initializer_list<int> members);

    int universe_size() const { return n_; }
    bool test(int player) const { return (words_[player >> 6] >> (player & 63)) & 1; }
    void set(int player) { words_[player >> 6] |= std::uint64_t{1} << (player & 63); }
    void reset(int player) { words_[player >> 6] &= ~(std::uint64_t{1} << (player & 63)); }
    void clear();
    int count() const;

    /// Visits members in ascending player order.
    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                int bit = __builtin_ctzll(bits);
                fn(static_cast<int>(w << 6) + bit);
                bits &= bits - 1;
            }
        }
    }

    /// True if every member of `other` is also a member of this coalition.
    bool contains_all(const Coalition& other) const;

    /// Packs the membership bits into one word; requires n <= 64.
    std::uint64_t to_index() const;

    bool operator==(const Coalition& other) const = default;

private:
    int n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Characteristic function of a cooperative game. Implementations must be
/// pure: the same coalition always evaluates to the bit-identical value, and
/// concurrent calls from multiple workers are safe.
class CharacteristicFn {
public:
    virtual ~CharacteristicFn() = default;
    virtual double value(const Coalition& coalition) const = 0;
};

/// phi(C) = sum of per-player weights over the members. Every pairwise
/// interaction of an additive game is zero.
class AdditiveGame final : public CharacteristicFn {
public:
    explicit AdditiveGame(std::vector<double> weights) : weights_(std::move(weights)) {}
    double value(const Coalition& coalition) const override;
    int players() const { return static_cast<int>(weights_.size()); }

private:
    std::vector<double> weights_;
};

/// phi(C) = 1 iff the required set is contained in C, else 0.
class UnanimityGame final : public CharacteristicFn {
public:
    UnanimityGame(int universe_size, const std::vector<int>& required);
    double value(const Coalition& coalition) const override;

private:
    Coalition required_;
};

/// phi defined by an explicit table over all 2^n coalitions (n <= 24).
class TabulatedGame final : public CharacteristicFn {
public:
    TabulatedGame(int universe_size, std::vector<double> table);
    /// One independent uniform [0, 1) draw per coalition.
    static TabulatedGame random_uniform(int universe_size, std::uint64_t seed);
    double value(const Coalition& coalition) const override;
    int players() const { return n_; }

private:
    int n_;
    std::vector<double> table_;
};

/// Result of one interaction query. Exact mode reports stderr = 0 and
/// samples = 0.
struct InteractionEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

enum class SamplingMode { Exact, Sampled };

const char* to_string(SamplingMode mode);

/// Pairwise interaction values for all cross-modal pairs: entry (a, b) is
/// the interaction of video player a with text player b.
struct InteractionMap {
    Matrix values;
    SamplingMode mode = SamplingMode::Exact;
    Level level = Level::Entity;
};

inline constexpr int kDefaultEnumCap = 22;

/// Exact pairwise interaction of players i and j:
///
///   sum over all C subset of N\{i,j} of
///     [phi(C u {i,j}) + phi(C) - phi(C u {i}) - phi(C u {j})] / 2^(n-2)
///
/// The merged hypothetical player [{i,j}] contributes both members' tokens,
/// so its term is evaluated as phi(C u {i,j}). Enumerates 2^(n-2) coalitions;
/// refuses when n - 2 exceeds enum_cap.
InteractionEstimate exact_interaction(const CharacteristicFn& fn, const PlayerSet& players,
                                      int i, int j, int enum_cap = kDefaultEnumCap);

/// Unbiased Monte Carlo estimate of the same quantity. Coalitions are drawn
/// uniformly over subsets of N\{i,j} (each player in with probability 1/2),
/// which matches the 1/2^(n-2) weighting exactly. Every sample has its own
/// counter-derived random stream, so results are bit-identical for any seed
/// regardless of the worker count.
InteractionEstimate sampled_interaction(const CharacteristicFn& fn, const PlayerSet& players,
                                        int i, int j, std::uint64_t samples, std::uint64_t seed,
                                        unsigned threads = 1);

/// Batches the interaction over all (video, text) pairs. `budget` is the
/// per-pair sample count in sampled mode. Pairs are independent; the matrix
/// is identical in serial and parallel execution.
InteractionMap interaction_matrix(const CharacteristicFn& fn, const PlayerSet& players,
                                  SamplingMode mode, std::uint64_t budget, std::uint64_t seed,
                                  unsigned threads = 0, int enum_cap = kDefaultEnumCap);

} // namespace hbi

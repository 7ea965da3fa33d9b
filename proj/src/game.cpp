#include "hbi/game.hpp"

#include <cmath>
#include <string>

#include "hbi/parallel.hpp"
#include "hbi/rng.hpp"

namespace hbi {

void PlayerSet::validate() const {
    if (n < 0) fail(ErrorCode::ShapeMismatch, "player count must be non-negative");
    if (modality_split < 0 || modality_split > n)
        fail(ErrorCode::ShapeMismatch, "modality_split must lie in [0, n]");
}

Coalition::Coalition(int universe_size)
    : n_(universe_size), words_(static_cast<std::size_t>((universe_size + 63) / 64), 0) {
    if (universe_size < 0) fail(ErrorCode::ShapeMismatch, "coalition universe must be non-negative");
    if (words_.empty()) words_.resize(1, 0);
}

Coalition::Coalition(int universe_size, std::initializer_list<int> members) : Coalition(universe_size) {
    for (int player : members) {
        if (player < 0 || player >= n_)
            fail(ErrorCode::PlayerOutOfRange, "member " + std::to_string(player) + " outside universe");
        set(player);
    }
}

void Coalition::clear() {
    for (auto& word : words_) word = 0;
}

int Coalition::count() const {
    int total = 0;
    for (auto word : words_) total += __builtin_popcountll(word);
    return total;
}

bool Coalition::contains_all(const Coalition& other) const {
    for (std::size_t w = 0; w < words_.size() && w < other.words_.size(); ++w)
        if ((other.words_[w] & ~words_[w]) != 0) return false;
    return true;
}

std::uint64_t Coalition::to_index() const {
    if (n_ > 64) fail(ErrorCode::ShapeMismatch, "coalition index requires n <= 64");
    return words_[0];
}

double AdditiveGame::value(const Coalition& coalition) const {
    double acc = 0.0;
    coalition.for_each([&](int player) { acc += weights_[static_cast<std::size_t>(player)]; });
    return acc;
}

UnanimityGame::UnanimityGame(int universe_size, const std::vector<int>& required)
    : required_(universe_size) {
    for (int player : required) {
        if (player < 0 || player >= universe_size)
            fail(ErrorCode::PlayerOutOfRange, "required player " + std::to_string(player) + " outside universe");
        required_.set(player);
    }
}

double UnanimityGame::value(const Coalition& coalition) const {
    return coalition.contains_all(required_) ? 1.0 : 0.0;
}

TabulatedGame::TabulatedGame(int universe_size, std::vector<double> table)
    : n_(universe_size), table_(std::move(table)) {
    if (universe_size < 0 || universe_size > 24)
        fail(ErrorCode::ShapeMismatch, "tabulated game supports 0 <= n <= 24");
    if (table_.size() != (std::size_t{1} << universe_size))
        fail(ErrorCode::ShapeMismatch, "tabulated game needs 2^n values");
}

TabulatedGame TabulatedGame::random_uniform(int universe_size, std::uint64_t seed) {
    if (universe_size < 0 || universe_size > 24)
        fail(ErrorCode::ShapeMismatch, "tabulated game supports 0 <= n <= 24");
    std::vector<double> table(std::size_t{1} << universe_size);
    SplitMix64 rng(derive_stream(seed, 0));
    for (auto& v : table) v = rng.uniform();
    return TabulatedGame(universe_size, std::move(table));
}

double TabulatedGame::value(const Coalition& coalition) const {
    return table_[coalition.to_index()];
}

const char* to_string(SamplingMode mode) {
    return mode == SamplingMode::Exact ? "exact" : "sampled";
}

namespace {

void check_pair(const PlayerSet& players, int i, int j) {
    players.validate();
    if (i < 0 || i >= players.n || j < 0 || j >= players.n)
        fail(ErrorCode::PlayerOutOfRange,
             "pair (" + std::to_string(i) + ", " + std::to_string(j) + ") outside universe of " +
                 std::to_string(players.n));
    if (i == j) fail(ErrorCode::IdenticalPlayers, "interaction requires two distinct players");
}

std::vector<int> remaining_players(const PlayerSet& players, int i, int j) {
    std::vector<int> rest;
    rest.reserve(static_cast<std::size_t>(players.n - 2));
    for (int p = 0; p < players.n; ++p)
        if (p != i && p != j) rest.push_back(p);
    return rest;
}

// phi(C u {i,j}) + phi(C) - phi(C u {i}) - phi(C u {j}), with C holding
// neither i nor j on entry (restored on exit). Grouped as (a + b) - (c + d)
// so that swapping i and j gives the bit-identical value.
double interaction_bracket(const CharacteristicFn& fn, Coalition& coalition, int i, int j) {
    double phi_c = fn.value(coalition);
    coalition.set(i);
    double phi_i = fn.value(coalition);
    coalition.set(j);
    double phi_ij = fn.value(coalition);
    coalition.reset(i);
    double phi_j = fn.value(coalition);
    coalition.reset(j);
    return (phi_ij + phi_c) - (phi_i + phi_j);
}

} // namespace

InteractionEstimate exact_interaction(const CharacteristicFn& fn, const PlayerSet& players,
                                      int i, int j, int enum_cap) {
    check_pair(players, i, j);
    int m = players.n - 2;
    if (m > enum_cap)
        fail(ErrorCode::EnumerationTooLarge,
             "n - 2 = " + std::to_string(m) + " exceeds enumeration cap " + std::to_string(enum_cap));

    std::vector<int> rest = remaining_players(players, i, j);
    Coalition coalition(players.n);

    // Gray-code walk over all 2^m subsets of the remaining players: exactly
    // one membership bit flips per step.
    double total = 0.0;
    std::uint64_t count = std::uint64_t{1} << m;
    std::uint64_t gray = 0;
    for (std::uint64_t step = 0;; ++step) {
        total += interaction_bracket(fn, coalition, i, j);
        if (step + 1 == count) break;
        std::uint64_t next_gray = (step + 1) ^ ((step + 1) >> 1);
        std::uint64_t changed = gray ^ next_gray;
        int bit = __builtin_ctzll(changed);
        if (next_gray & changed)
            coalition.set(rest[static_cast<std::size_t>(bit)]);
        else
            coalition.reset(rest[static_cast<std::size_t>(bit)]);
        gray = next_gray;
    }

    InteractionEstimate estimate;
    estimate.value = std::ldexp(total, -m); // p(C) = 1 / 2^(n-2)
    return estimate;
}

InteractionEstimate sampled_interaction(const CharacteristicFn& fn, const PlayerSet& players,
                                        int i, int j, std::uint64_t samples, std::uint64_t seed,
                                        unsigned threads) {
    check_pair(players, i, j);
    if (samples == 0) fail(ErrorCode::ZeroSamples, "sampled interaction needs at least one sample");

    std::vector<int> rest = remaining_players(players, i, j);
    std::size_t m = rest.size();

    std::vector<double> brackets(samples);
    parallel_for(samples, threads, [&](std::size_t s) {
        SplitMix64 stream(derive_stream(seed, s));
        Coalition coalition(players.n);
        std::uint64_t bits = 0;
        for (std::size_t t = 0; t < m; ++t) {
            if ((t & 63) == 0) bits = stream.next();
            if ((bits >> (t & 63)) & 1) coalition.set(rest[t]);
        }
        brackets[s] = interaction_bracket(fn, coalition, i, j);
    });

    // Two-pass mean/variance in sample order keeps the reduction independent
    // of how the loop above was chunked.
    double mean = 0.0;
    for (double b : brackets) mean += b;
    mean /= static_cast<double>(samples);
    double ss = 0.0;
    for (double b : brackets) ss += (b - mean) * (b - mean);

    InteractionEstimate estimate;
    estimate.value = mean;
    estimate.samples = samples;
    if (samples > 1) {
        double variance = ss / static_cast<double>(samples - 1);
        estimate.std_error = std::sqrt(variance / static_cast<double>(samples));
    }
    return estimate;
}

InteractionMap interaction_matrix(const CharacteristicFn& fn, const PlayerSet& players,
                                  SamplingMode mode, std::uint64_t budget, std::uint64_t seed,
                                  unsigned threads, int enum_cap) {
    players.validate();
    int n_video = players.video_count();
    int n_text = players.text_count();
    if (n_video < 1 || n_text < 1)
        fail(ErrorCode::EmptyModality, "interaction matrix needs at least one player per modality");

    // Preconditions checked here so that no exception can escape a worker.
    if (mode == SamplingMode::Exact && players.n - 2 > enum_cap)
        fail(ErrorCode::EnumerationTooLarge,
             "n - 2 = " + std::to_string(players.n - 2) + " exceeds enumeration cap " +
                 std::to_string(enum_cap));
    if (mode == SamplingMode::Sampled && budget == 0)
        fail(ErrorCode::ZeroSamples, "sampled interaction matrix needs budget >= 1");

    InteractionMap map;
    map.mode = mode;
    map.values.resize(n_video, n_text);

    std::size_t pairs = static_cast<std::size_t>(n_video) * static_cast<std::size_t>(n_text);
    parallel_for(pairs, threads, [&](std::size_t pair) {
        int a = static_cast<int>(pair) / n_text;
        int b = static_cast<int>(pair) % n_text;
        int i = a;
        int j = players.modality_split + b;
        InteractionEstimate estimate =
            mode == SamplingMode::Exact
                ? exact_interaction(fn, players, i, j, enum_cap)
                : sampled_interaction(fn, players, i, j, budget, derive_stream(seed, pair), 1);
        map.values(a, b) = estimate.value;
    });
    return map;
}

} // namespace hbi

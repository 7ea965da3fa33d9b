#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hbi/alignment.hpp"
#include "hbi/io.hpp"
#include "hbi/objectives.hpp"
#include "hbi/rng.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

hbi::RunConfig load_config(const CommonFlags& flags) {
    if (flags.config_path.empty())
        hbi::fail(hbi::ErrorCode::ConfigError, "--config is required");
    hbi::RunConfig config = hbi::RunConfig::load(flags.config_path);
    if (flags.mode) {
        if (*flags.mode == "exact")
            config.hierarchy.mode = hbi::SamplingMode::Exact;
        else if (*flags.mode == "sampled")
            config.hierarchy.mode = hbi::SamplingMode::Sampled;
        else
            hbi::fail(hbi::ErrorCode::ConfigError, "--mode must be 'exact' or 'sampled'");
    }
    if (flags.samples) config.hierarchy.samples = *flags.samples;
    if (flags.seed) config.hierarchy.seed = *flags.seed;
    if (flags.threads) config.hierarchy.threads = *flags.threads;
    return config;
}

hbi::FeatureMatrix load_features(const fs::path& path, hbi::Modality modality) {
    hbi::FeatureMatrix features;
    features.data = hbi::read_matrix(path);
    features.level = hbi::Level::Entity;
    features.modality = modality;
    return features;
}

struct GameInstance {
    std::unique_ptr<hbi::CharacteristicFn> fn;
    hbi::PlayerSet players;
};

GameInstance make_game(const hbi::RunConfig& config) {
    GameInstance out;
    switch (config.game.type) {
    case hbi::GameSpec::Type::Similarity: {
        if (!config.video_path || !config.text_path)
            hbi::fail(hbi::ErrorCode::ConfigError,
                      "fields 'video' and 'text' are required for similarity games");
        hbi::SimilarityGame game;
        game.video = load_features(*config.video_path, hbi::Modality::Video);
        game.text = load_features(*config.text_path, hbi::Modality::Text);
        game.weights_video = config.hierarchy.omega_video.size()
                                 ? config.hierarchy.omega_video
                                 : hbi::Vector::Constant(game.video.rows(), 1.0 / game.video.rows());
        game.weights_text = config.hierarchy.omega_text.size()
                                ? config.hierarchy.omega_text
                                : hbi::Vector::Constant(game.text.rows(), 1.0 / game.text.rows());
        auto fn = std::make_unique<hbi::SimilarityCharacteristic>(game);
        out.players = fn->players();
        out.fn = std::move(fn);
        break;
    }
    case hbi::GameSpec::Type::Additive:
        out.players = {static_cast<int>(config.game.weights.size()), config.game.modality_split};
        out.fn = std::make_unique<hbi::AdditiveGame>(config.game.weights);
        break;
    case hbi::GameSpec::Type::Unanimity:
        out.players = {config.game.n, config.game.modality_split};
        out.fn = std::make_unique<hbi::UnanimityGame>(config.game.n, config.game.required);
        break;
    case hbi::GameSpec::Type::Tabulated:
        out.players = {config.game.n, config.game.modality_split};
        out.fn = std::make_unique<hbi::TabulatedGame>(
            hbi::TabulatedGame::random_uniform(config.game.n, config.game.values_seed));
        break;
    }
    out.players.validate();
    return out;
}

int run_banzhaf(const CommonFlags& flags, const std::vector<int>& pair) {
    hbi::RunConfig config = load_config(flags);
    GameInstance game = make_game(config);

    hbi::InteractionEstimate estimate;
    if (config.hierarchy.mode == hbi::SamplingMode::Exact)
        estimate = hbi::exact_interaction(*game.fn, game.players, pair[0], pair[1],
                                          config.hierarchy.enum_cap);
    else
        estimate = hbi::sampled_interaction(*game.fn, game.players, pair[0], pair[1],
                                            config.hierarchy.samples, config.hierarchy.seed,
                                            config.hierarchy.threads);

    ordered_json out;
    out["value"] = estimate.value;
    out["stderr"] = estimate.std_error;
    out["samples"] = estimate.samples;
    std::cout << out.dump() << "\n";
    return 0;
}

ordered_json cluster_json(const hbi::ClusterAssignment& assignment) {
    ordered_json out;
    out["centers"] = assignment.centers;
    out["labels"] = assignment.labels;
    out["rho"] = std::vector<double>(assignment.density.begin(), assignment.density.end());
    out["xi"] = std::vector<double>(assignment.distance_index.begin(),
                                    assignment.distance_index.end());
    return out;
}

std::vector<double> to_std(const hbi::Vector& v) {
    return std::vector<double>(v.begin(), v.end());
}

int run_hierarchy(const CommonFlags& flags, const std::string& out_dir) {
    auto start = std::chrono::steady_clock::now();
    hbi::RunConfig config = load_config(flags);
    if (!config.video_path || !config.text_path)
        hbi::fail(hbi::ErrorCode::ConfigError, "fields 'video' and 'text' are required");
    if (out_dir.empty()) hbi::fail(hbi::ErrorCode::ConfigError, "--out is required");

    hbi::FeatureMatrix video = load_features(*config.video_path, hbi::Modality::Video);
    hbi::FeatureMatrix text = load_features(*config.text_path, hbi::Modality::Text);

    hbi::HierarchyResult result = hbi::run_hierarchy(video, text, config.hierarchy);
    auto computed = std::chrono::steady_clock::now();

    fs::path dir(out_dir);
    fs::create_directories(dir);
    hbi::write_csv(dir / "entity.map.csv", result.entity.map.values);
    hbi::write_csv(dir / "action.map.csv", result.action.map.values);
    hbi::write_csv(dir / "event.map.csv", result.event.map.values);

    ordered_json clusters;
    clusters["action"]["video"] = cluster_json(result.video_action_clusters);
    clusters["action"]["text"] = cluster_json(result.text_action_clusters);
    clusters["event"]["video"] = cluster_json(result.video_event_clusters);
    clusters["event"]["text"] = cluster_json(result.text_event_clusters);

    ordered_json report;
    report["mode"] = hbi::to_string(config.hierarchy.mode);
    report["samples"] =
        config.hierarchy.mode == hbi::SamplingMode::Sampled ? config.hierarchy.samples : 0;
    report["seed"] = config.hierarchy.seed;
    report["clusters"] = {{"video_action", config.hierarchy.clusters.video_action},
                          {"video_event", config.hierarchy.clusters.video_event},
                          {"text_action", config.hierarchy.clusters.text_action},
                          {"text_event", config.hierarchy.clusters.text_event}};
    const hbi::Level levels[3] = {hbi::Level::Entity, hbi::Level::Action, hbi::Level::Event};
    for (hbi::Level level : levels) {
        const hbi::LevelResult& lr = result.level(level);
        report["similarity"][hbi::to_string(level)] = lr.similarity;
        report["gates"][hbi::to_string(level)]["gamma"] = to_std(lr.gamma);
        report["gates"][hbi::to_string(level)]["delta"] = to_std(lr.delta);
    }

    // With prediction matrices configured, compare them against this run's
    // interaction maps.
    bool any_pred = false;
    for (int l = 0; l < 3; ++l)
        if (config.loss_paths[static_cast<std::size_t>(l)].pred) any_pred = true;
    if (any_pred) {
        for (int l = 0; l < 3; ++l) {
            const auto& paths = config.loss_paths[static_cast<std::size_t>(l)];
            if (!paths.pred)
                hbi::fail(hbi::ErrorCode::MissingLevel,
                          std::string("loss.") + hbi::to_string(levels[l]) + ".pred is missing");
            hbi::Matrix pred = hbi::load_matrix_any(*paths.pred);
            report["losses"]["banzhaf"][hbi::to_string(levels[l])] =
                hbi::banzhaf_loss(pred, result.level(levels[l]).map);
        }
    }

    std::ofstream clusters_out(dir / "clusters.json", std::ios::binary | std::ios::trunc);
    clusters_out << clusters.dump(2) << "\n";
    std::ofstream report_out(dir / "report.json", std::ios::binary | std::ios::trunc);
    report_out << report.dump(2) << "\n";
    if (!clusters_out || !report_out)
        hbi::fail(hbi::ErrorCode::BadFile, "write failed in " + dir.string());

    auto finished = std::chrono::steady_clock::now();
    auto ms = [](auto a, auto b) {
        return std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
    };
    std::cerr << "hierarchy: compute " << ms(start, computed) << " ms, write "
              << ms(computed, finished) << " ms, out " << dir.string() << "\n";
    return 0;
}

int run_loss(const CommonFlags& flags, const std::string& pred_override,
             const std::string& scores_override, const std::string& out_path) {
    hbi::RunConfig config = load_config(flags);
    const hbi::Level levels[3] = {hbi::Level::Entity, hbi::Level::Action, hbi::Level::Event};

    std::array<std::optional<hbi::LevelLossInput>, 3> inputs;
    std::array<hbi::Matrix, 3> scores;
    for (int l = 0; l < 3; ++l) {
        auto paths = config.loss_paths[static_cast<std::size_t>(l)];
        if (!pred_override.empty()) paths.pred = fs::path(pred_override);
        if (!scores_override.empty()) paths.scores = fs::path(scores_override);
        const std::string where = std::string("loss.") + hbi::to_string(levels[l]);
        if (!paths.pred) hbi::fail(hbi::ErrorCode::MissingLevel, where + ".pred is missing");
        if (!paths.target) hbi::fail(hbi::ErrorCode::MissingLevel, where + ".target is missing");
        if (!paths.scores) hbi::fail(hbi::ErrorCode::MissingLevel, where + ".scores is missing");

        hbi::Matrix pred = hbi::load_matrix_any(*paths.pred);
        hbi::InteractionMap target;
        target.values = hbi::load_matrix_any(*paths.target);
        target.level = levels[l];
        scores[static_cast<std::size_t>(l)] = hbi::load_matrix_any(*paths.scores);

        hbi::LevelLossInput input;
        input.banzhaf = hbi::banzhaf_loss(pred, target);
        input.contrastive =
            hbi::contrastive_loss(scores[static_cast<std::size_t>(l)], config.loss_weights.tau);
        inputs[static_cast<std::size_t>(l)] = input;
    }

    double e2a = hbi::distillation_loss(scores[0], scores[1]);
    double e2v = hbi::distillation_loss(scores[0], scores[2]);
    hbi::LossReport report =
        hbi::total_loss(inputs, e2a, e2v, config.task_loss, config.loss_weights);

    ordered_json out;
    for (hbi::Level level : levels) {
        const auto& terms = report.level(level);
        out["levels"][hbi::to_string(level)] = {{"contrastive", terms.contrastive},
                                                {"banzhaf", terms.banzhaf},
                                                {"combined", terms.combined}};
    }
    out["distillation"] = {{"entity_to_action", report.distill_e2a},
                           {"entity_to_event", report.distill_e2v}};
    out["task"] = report.task;
    out["weights"] = {{"alpha", config.loss_weights.alpha},
                      {"beta", config.loss_weights.beta},
                      {"lambda", config.loss_weights.lambda},
                      {"tau", config.loss_weights.tau}};
    out["total"] = report.total;

    std::string dumped = out.dump(2);
    std::cout << dumped << "\n";
    if (!out_path.empty()) {
        std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
        file << dumped << "\n";
        if (!file) hbi::fail(hbi::ErrorCode::BadFile, "write failed for " + out_path);
    }
    return 0;
}

hbi::Matrix random_unit_rows(int rows, int cols, hbi::SplitMix64& rng) {
    hbi::Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
        m.row(r) /= m.row(r).norm();
    }
    return m;
}

hbi::Matrix random_gaussian(int rows, int cols, hbi::SplitMix64& rng) {
    hbi::Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
    return m;
}

void write_json_file(const fs::path& path, const ordered_json& doc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << "\n";
    if (!out) hbi::fail(hbi::ErrorCode::BadFile, "write failed for " + path.string());
}

int run_fixtures(const std::string& out_dir, std::uint64_t seed) {
    if (out_dir.empty()) hbi::fail(hbi::ErrorCode::ConfigError, "--out is required");
    fs::path dir(out_dir);
    fs::create_directories(dir);

    // Synthetic games.
    ordered_json additive;
    additive["game"] = {{"type", "additive"},
                        {"weights", std::vector<double>{1.0, 2.0, 3.0, 4.0}},
                        {"modality_split", 2}};
    additive["mode"] = "exact";
    write_json_file(dir / "additive.json", additive);

    ordered_json additive_large;
    additive_large["game"] = {{"type", "additive"},
                              {"weights", std::vector<double>(30, 1.0)},
                              {"modality_split", 15}};
    additive_large["mode"] = "exact";
    write_json_file(dir / "additive_large.json", additive_large);

    ordered_json unanimity;
    unanimity["game"] = {{"type", "unanimity"},
                         {"n", 3},
                         {"required", std::vector<int>{0, 1}},
                         {"modality_split", 1}};
    unanimity["mode"] = "exact";
    write_json_file(dir / "unanimity.json", unanimity);

    // Entity-level embedding matrices (unit rows) and the hierarchy config.
    {
        hbi::SplitMix64 rng(hbi::derive_stream(seed, 1));
        hbi::write_matrix(dir / "video.hbim", random_unit_rows(12, 512, rng));
    }
    {
        hbi::SplitMix64 rng(hbi::derive_stream(seed, 2));
        hbi::write_matrix(dir / "text.hbim", random_unit_rows(32, 512, rng));
    }
    ordered_json hierarchy;
    hierarchy["video"] = "video.hbim";
    hierarchy["text"] = "text.hbim";
    hierarchy["mode"] = "sampled";
    hierarchy["samples"] = 1000;
    hierarchy["seed"] = seed;
    write_json_file(dir / "hierarchy.json", hierarchy);

    // Two Gaussian blobs (8 points each at +-5 e1, sigma 0.1) for clustering.
    {
        hbi::SplitMix64 rng(hbi::derive_stream(seed, 3));
        hbi::Matrix blobs(16, 4);
        for (int p = 0; p < 16; ++p) {
            double center = p < 8 ? 5.0 : -5.0;
            for (int c = 0; c < 4; ++c) blobs(p, c) = (c == 0 ? center : 0.0) + 0.1 * rng.gaussian();
        }
        hbi::write_matrix(dir / "blobs.hbim", blobs);
    }

    // Loss fixtures: per-level prediction, interaction target, and an 8x8
    // batch score matrix.
    const char* names[3] = {"entity", "action", "event"};
    const int shapes[3][2] = {{12, 32}, {6, 16}, {2, 4}};
    ordered_json loss;
    loss["weights"] = {{"alpha", 1.0}, {"beta", 1.0}, {"lambda", 0.0}, {"tau", 0.01}};
    loss["loss"]["task"] = 0.0;
    for (int l = 0; l < 3; ++l) {
        hbi::SplitMix64 rng(hbi::derive_stream(seed, 10 + static_cast<std::uint64_t>(l)));
        hbi::Matrix target = 0.5 * random_gaussian(shapes[l][0], shapes[l][1], rng);
        hbi::Matrix pred = target + 0.1 * random_gaussian(shapes[l][0], shapes[l][1], rng);
        hbi::Matrix scores = random_gaussian(8, 8, rng);
        std::string t = std::string("target_") + names[l] + ".hbim";
        std::string p = std::string("pred_") + names[l] + ".hbim";
        std::string s = std::string("scores_") + names[l] + ".hbim";
        hbi::write_matrix(dir / t, target);
        hbi::write_matrix(dir / p, pred);
        hbi::write_matrix(dir / s, scores);
        loss["loss"][names[l]] = {{"pred", p}, {"target", t}, {"scores", s}};
    }
    write_json_file(dir / "loss.json", loss);

    std::cerr << "fixtures written to " << dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical Banzhaf Interaction pipeline over embedding matrices"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::vector<int> pair;
    std::string out_dir;
    std::string pred_override;
    std::string scores_override;
    std::string loss_out;
    std::uint64_t fixtures_seed = 0;

    auto add_common = [&](CLI::App* sub, bool with_config = true) {
        if (with_config) sub->add_option("--config", flags.config_path, "Run configuration (JSON)");
        sub->add_option_function<std::string>(
               "--mode", [&](const std::string& v) { flags.mode = v; }, "exact|sampled")
            ->check(CLI::IsMember({"exact", "sampled"}));
        sub->add_option_function<std::uint64_t>(
            "--samples", [&](std::uint64_t v) { flags.samples = v; }, "Samples per pair");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { flags.seed = v; }, "Random seed");
        sub->add_option_function<unsigned>(
            "--threads", [&](unsigned v) { flags.threads = v; }, "Worker count (0 = hardware)");
    };

    CLI::App* banzhaf = app.add_subcommand("banzhaf", "Interaction value for one player pair");
    add_common(banzhaf);
    banzhaf->add_option("--pair", pair, "Player indices i j (video rows first, then text rows)")
        ->expected(2)
        ->required();

    CLI::App* hierarchy = app.add_subcommand("hierarchy", "Three-level interaction maps and report");
    add_common(hierarchy);
    hierarchy->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* loss = app.add_subcommand("loss", "Loss report from configured matrices");
    add_common(loss);
    loss->add_option("--pred", pred_override, "Prediction matrix applied to every level");
    loss->add_option("--scores", scores_override, "Batch score matrix applied to every level");
    loss->add_option("--out", loss_out, "Also write the report to this file");

    CLI::App* fixtures = app.add_subcommand("fixtures", "Generate synthetic test inputs");
    fixtures->add_option("--out", out_dir, "Output directory")->required();
    fixtures->add_option("--seed", fixtures_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (banzhaf->parsed()) return run_banzhaf(flags, pair);
        if (hierarchy->parsed()) return run_hierarchy(flags, out_dir);
        if (loss->parsed()) return run_loss(flags, pred_override, scores_override, loss_out);
        if (fixtures->parsed()) return run_fixtures(out_dir, fixtures_seed);
    } catch (const hbi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hbi::error_exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

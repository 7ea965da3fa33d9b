#include "hbi/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace hbi {

namespace {

constexpr char kMagic[4] = {'H', 'B', 'I', 'M'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::ofstream& out, std::uint32_t v) {
    unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF),
                              static_cast<unsigned char>((v >> 16) & 0xFF),
                              static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

float f32_from_le(const unsigned char* p) {
    std::uint32_t bits = read_u32_le(p);
    float value;
    std::memcpy(&value, &bits, 4);
    return value;
}

} // namespace

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::BadFile, "cannot open matrix file " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 16) fail(ErrorCode::BadFile, path.string() + " is shorter than the header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        fail(ErrorCode::BadFile, path.string() + " does not start with the HBIM magic");
    if (read_u32_le(bytes.data() + 4) != kVersion)
        fail(ErrorCode::BadFile, path.string() + " has an unsupported version");
    std::uint32_t rows = read_u32_le(bytes.data() + 8);
    std::uint32_t cols = read_u32_le(bytes.data() + 12);
    std::size_t expected = 16 + 4ull * rows * cols;
    if (bytes.size() != expected)
        fail(ErrorCode::BadFile, path.string() + " has " + std::to_string(bytes.size()) +
                                     " bytes, expected " + std::to_string(expected));

    Matrix out(rows, cols);
    const unsigned char* p = bytes.data() + 16;
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c, p += 4) {
            float value = f32_from_le(p);
            if (!std::isfinite(value))
                fail(ErrorCode::NonFiniteInput,
                     path.string() + " holds a non-finite value at (" + std::to_string(r) + ", " +
                         std::to_string(c) + ")");
            out(r, c) = static_cast<double>(value);
        }
    return out;
}

void write_matrix(const std::filesystem::path& path, const Matrix& matrix) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::BadFile, "cannot write matrix file " + path.string());
    out.write(kMagic, 4);
    write_u32_le(out, kVersion);
    write_u32_le(out, static_cast<std::uint32_t>(matrix.rows()));
    write_u32_le(out, static_cast<std::uint32_t>(matrix.cols()));
    for (Eigen::Index r = 0; r < matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
            float value = static_cast<float>(matrix(r, c));
            std::uint32_t bits;
            std::memcpy(&bits, &value, 4);
            write_u32_le(out, bits);
        }
    if (!out) fail(ErrorCode::BadFile, "write failed for " + path.string());
}

void write_csv(const std::filesystem::path& path, const Matrix& matrix) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::BadFile, "cannot write " + path.string());
    char buffer[64];
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
            std::snprintf(buffer, sizeof buffer, "%.9g", matrix(r, c));
            if (c) out.put(',');
            out << buffer;
        }
        out.put('\n');
    }
    if (!out) fail(ErrorCode::BadFile, "write failed for " + path.string());
}

Matrix read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::BadFile, "cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            fail(ErrorCode::BadFile, path.string() + " has ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(ErrorCode::BadFile, path.string() + " is empty");
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return out;
}

Matrix load_matrix_any(const std::filesystem::path& path) {
    if (path.extension() == ".csv") return read_csv(path);
    return read_matrix(path);
}

Vector read_vector(const std::filesystem::path& path) {
    Matrix m = load_matrix_any(path);
    if (m.rows() != 1 && m.cols() != 1)
        fail(ErrorCode::ShapeMismatch, path.string() + " must hold a single row or column");
    if (m.rows() == 1) return m.row(0).transpose();
    return m.col(0);
}

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    fail(ErrorCode::ConfigError, "field '" + field + "' " + why);
}

void check_keys(const json& object, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : object.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known) fail(ErrorCode::ConfigError, "unknown key '" + item.key() + "' in " + where);
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

GateConfig parse_gate(const json& node, const std::string& where, double default_constant,
                      const std::filesystem::path& base) {
    if (node.is_number()) return GateConfig::constant_gate(node.get<double>());
    if (!node.is_object()) bad_field(where, "must be a number or an object");
    check_keys(node, where, {"mode", "value", "weights"});
    std::string mode = node.value("mode", "constant");
    if (mode == "constant") {
        return GateConfig::constant_gate(node.value("value", default_constant));
    }
    if (mode == "linear") {
        if (!node.contains("weights")) bad_field(where + ".weights", "is required in linear mode");
        Vector loaded = read_vector(resolve(base, node["weights"].get<std::string>()));
        if (loaded.size() < 2) bad_field(where + ".weights", "needs at least [w..., bias]");
        Vector w = loaded.head(loaded.size() - 1);
        return GateConfig::linear_gate(std::move(w), loaded[loaded.size() - 1]);
    }
    bad_field(where + ".mode", "must be 'constant' or 'linear'");
}

} // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ConfigError, "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ConfigError, "config parse error: " + std::string(e.what()));
    }
    if (!doc.is_object()) fail(ErrorCode::ConfigError, "config root must be an object");
    std::filesystem::path base = path.parent_path();

    check_keys(doc, "config",
               {"video", "text", "clusters", "knn", "mode", "samples", "seed", "threads", "enum_cap",
                "text_cls_index", "gates", "weights", "omega", "merge", "game", "loss"});

    RunConfig config;

    if (doc.contains("video")) config.video_path = resolve(base, doc["video"].get<std::string>());
    if (doc.contains("text")) config.text_path = resolve(base, doc["text"].get<std::string>());

    if (doc.contains("clusters")) {
        const json& c = doc["clusters"];
        check_keys(c, "clusters", {"video_action", "video_event", "text_action", "text_event"});
        config.hierarchy.clusters.video_action = c.value("video_action", 6);
        config.hierarchy.clusters.video_event = c.value("video_event", 2);
        config.hierarchy.clusters.text_action = c.value("text_action", 16);
        config.hierarchy.clusters.text_event = c.value("text_event", 4);
    }
    for (int v : {config.hierarchy.clusters.video_action, config.hierarchy.clusters.video_event,
                  config.hierarchy.clusters.text_action, config.hierarchy.clusters.text_event})
        if (v < 1) bad_field("clusters", "must hold positive counts");

    config.hierarchy.k_neighbors = doc.value("knn", 0);
    if (config.hierarchy.k_neighbors < 0) bad_field("knn", "must be non-negative");

    std::string mode = doc.value("mode", "sampled");
    if (mode == "exact")
        config.hierarchy.mode = SamplingMode::Exact;
    else if (mode == "sampled")
        config.hierarchy.mode = SamplingMode::Sampled;
    else
        bad_field("mode", "must be 'exact' or 'sampled'");

    config.hierarchy.samples = doc.value("samples", std::uint64_t{1000});
    config.hierarchy.seed = doc.value("seed", std::uint64_t{0});
    config.hierarchy.threads = doc.value("threads", 0u);
    config.hierarchy.enum_cap = doc.value("enum_cap", kDefaultEnumCap);
    config.hierarchy.text_cls_index = doc.value("text_cls_index", 0);

    if (doc.contains("gates")) {
        const json& g = doc["gates"];
        check_keys(g, "gates", {"entity", "action", "event"});
        const char* names[3] = {"entity", "action", "event"};
        for (int l = 0; l < 3; ++l) {
            if (!g.contains(names[l])) continue;
            const json& node = g[names[l]];
            check_keys(node, std::string("gates.") + names[l], {"gamma", "delta"});
            if (node.contains("gamma"))
                config.hierarchy.gates[static_cast<std::size_t>(l)].gamma =
                    parse_gate(node["gamma"], std::string("gates.") + names[l] + ".gamma", 0.45, base);
            if (node.contains("delta"))
                config.hierarchy.gates[static_cast<std::size_t>(l)].delta =
                    parse_gate(node["delta"], std::string("gates.") + names[l] + ".delta", 0.75, base);
        }
    }

    if (doc.contains("weights")) {
        const json& w = doc["weights"];
        check_keys(w, "weights", {"alpha", "beta", "lambda", "tau"});
        config.loss_weights.alpha = w.value("alpha", 1.0);
        config.loss_weights.beta = w.value("beta", 1.0);
        config.loss_weights.lambda = w.value("lambda", 0.0);
        config.loss_weights.tau = w.value("tau", 0.01);
        config.loss_weights.validate();
    }

    if (doc.contains("omega")) {
        const json& o = doc["omega"];
        check_keys(o, "omega", {"video", "text"});
        if (o.contains("video"))
            config.hierarchy.omega_video = read_vector(resolve(base, o["video"].get<std::string>()));
        if (o.contains("text"))
            config.hierarchy.omega_text = read_vector(resolve(base, o["text"].get<std::string>()));
    }

    if (doc.contains("merge")) {
        const json& m = doc["merge"];
        check_keys(m, "merge",
                   {"bypass_attention", "video_weights_action", "video_weights_event",
                    "text_weights_action", "text_weights_event", "temporal_mix_video",
                    "temporal_mix_text"});
        config.hierarchy.bypass_attention = m.value("bypass_attention", false);
        if (m.contains("video_weights_action"))
            config.hierarchy.video_token_weights_action =
                read_vector(resolve(base, m["video_weights_action"].get<std::string>()));
        if (m.contains("video_weights_event"))
            config.hierarchy.video_token_weights_event =
                read_vector(resolve(base, m["video_weights_event"].get<std::string>()));
        if (m.contains("text_weights_action"))
            config.hierarchy.text_token_weights_action =
                read_vector(resolve(base, m["text_weights_action"].get<std::string>()));
        if (m.contains("text_weights_event"))
            config.hierarchy.text_token_weights_event =
                read_vector(resolve(base, m["text_weights_event"].get<std::string>()));
        if (m.contains("temporal_mix_video"))
            config.hierarchy.temporal_mix_video =
                load_matrix_any(resolve(base, m["temporal_mix_video"].get<std::string>()));
        if (m.contains("temporal_mix_text"))
            config.hierarchy.temporal_mix_text =
                load_matrix_any(resolve(base, m["temporal_mix_text"].get<std::string>()));
    }

    if (doc.contains("game")) {
        const json& g = doc["game"];
        check_keys(g, "game", {"type", "weights", "required", "n", "modality_split", "values_seed"});
        std::string type = g.value("type", "similarity");
        if (type == "similarity") {
            config.game.type = GameSpec::Type::Similarity;
        } else if (type == "additive") {
            config.game.type = GameSpec::Type::Additive;
            if (!g.contains("weights")) bad_field("game.weights", "is required for additive games");
            config.game.weights = g["weights"].get<std::vector<double>>();
            config.game.n = static_cast<int>(config.game.weights.size());
        } else if (type == "unanimity") {
            config.game.type = GameSpec::Type::Unanimity;
            if (!g.contains("n")) bad_field("game.n", "is required for unanimity games");
            config.game.n = g["n"].get<int>();
            config.game.required = g.value("required", std::vector<int>{});
        } else if (type == "tabulated") {
            config.game.type = GameSpec::Type::Tabulated;
            if (!g.contains("n")) bad_field("game.n", "is required for tabulated games");
            config.game.n = g["n"].get<int>();
            config.game.values_seed = g.value("values_seed", std::uint64_t{0});
        } else {
            bad_field("game.type", "must be similarity, additive, unanimity, or tabulated");
        }
        config.game.modality_split = g.value("modality_split", config.game.n / 2);
    }

    if (doc.contains("loss")) {
        const json& l = doc["loss"];
        check_keys(l, "loss", {"task", "entity", "action", "event"});
        config.task_loss = l.value("task", 0.0);
        const char* names[3] = {"entity", "action", "event"};
        for (int lv = 0; lv < 3; ++lv) {
            if (!l.contains(names[lv])) continue;
            const json& node = l[names[lv]];
            check_keys(node, std::string("loss.") + names[lv], {"pred", "target", "scores"});
            auto& paths = config.loss_paths[static_cast<std::size_t>(lv)];
            if (node.contains("pred")) paths.pred = resolve(base, node["pred"].get<std::string>());
            if (node.contains("target")) paths.target = resolve(base, node["target"].get<std::string>());
            if (node.contains("scores")) paths.scores = resolve(base, node["scores"].get<std::string>());
        }
    }

    return config;
}

} // namespace hbi

#include "nvi/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "nvi/error.hpp"

namespace nvi::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint io assumes a little-endian host");

namespace {

using json = nlohmann::ordered_json;
constexpr char kMagic[8] = {'N', 'V', 'I', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& file) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError(file, 0, "truncated checkpoint");
    return value;
}

std::optional<double> optional_number(const json& node, const char* key) {
    if (!node.contains(key) || node[key].is_null()) return std::nullopt;
    return node[key].get<double>();
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be a finite non-negative number");
    if (optimizer != "adam") throw ConfigError("unsupported optimizer '" + optimizer + "' (only adam)");
    if (loss != "mse") throw ConfigError("unsupported loss '" + loss + "' (only mse)");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(sigma_max > 0.0)) throw ConfigError("sigma_max must be positive");
    if (!(scale_max > 0.0)) throw ConfigError("scale_max must be positive");
}

json to_json(const TrainConfig& c) {
    json node;
    node["learning_rate"] = c.learning_rate;
    node["optimizer"] = c.optimizer;
    node["loss"] = c.loss;
    node["epochs"] = c.epochs;
    node["batch_size"] = c.batch_size;
    node["seed"] = c.seed;
    node["sigma_max"] = c.sigma_max;
    node["scale_max"] = c.scale_max;
    node["fine_tune_backbone"] = c.fine_tune_backbone;
    return node;
}

TrainConfig train_config_from_json(const json& node, TrainConfig c) {
    if (!node.is_object()) throw ConfigError("training config must be an object");
    for (const auto& [key, value] : node.items()) {
        try {
            if (key == "learning_rate") c.learning_rate = value.get<double>();
            else if (key == "optimizer") c.optimizer = value.get<std::string>();
            else if (key == "loss") c.loss = value.get<std::string>();
            else if (key == "epochs") c.epochs = value.get<int>();
            else if (key == "batch_size") c.batch_size = value.get<int>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "sigma_max") c.sigma_max = value.get<double>();
            else if (key == "scale_max") c.scale_max = value.get<double>();
            else if (key == "fine_tune_backbone") c.fine_tune_backbone = value.get<bool>();
            else throw ConfigError("unknown training config key '" + key + "'");
        } catch (const json::exception& e) {
            throw ConfigError("training config key '" + key + "': " + e.what());
        }
    }
    return c;
}

json to_json(const EpochMetrics& m) {
    json node;
    node["epoch"] = m.epoch;
    node["train_loss"] = m.train_loss;
    node["validation_loss"] = m.validation_loss ? json(*m.validation_loss) : json(nullptr);
    node["validation_r"] = m.validation_r ? json(*m.validation_r) : json(nullptr);
    return node;
}

json metrics_json(const Checkpoint& checkpoint) {
    json node;
    node["kind"] = checkpoint.kind;
    node["backbone"] = checkpoint.backbone;
    node["config"] = to_json(checkpoint.config);
    json epochs = json::array();
    for (const auto& m : checkpoint.metrics) epochs.push_back(to_json(m));
    node["epochs"] = std::move(epochs);
    return node;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    json header;
    header["schema_version"] = checkpoint.schema_version;
    header["kind"] = checkpoint.kind;
    header["backbone"] = checkpoint.backbone;
    header["architecture"] = checkpoint.architecture;
    header["config"] = to_json(checkpoint.config);
    json epochs = json::array();
    for (const auto& m : checkpoint.metrics) epochs.push_back(to_json(m));
    header["metrics"] = std::move(epochs);
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, static_cast<std::uint32_t>(checkpoint.schema_version));
    write_pod(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_pod(out, static_cast<std::uint64_t>(checkpoint.weights.size()));
    out.write(reinterpret_cast<const char*>(checkpoint.weights.data()),
              static_cast<std::streamsize>(checkpoint.weights.size() * sizeof(float)));
    if (!out) throw Error("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string file = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(file, 0, "cannot open checkpoint");
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError(file, 0, "not a checkpoint file (bad magic)");
    const auto version = read_pod<std::uint32_t>(in, file);
    if (version != kCheckpointSchemaVersion)
        throw ParseError(file, 0, "unsupported checkpoint schema version " + std::to_string(version));
    const auto header_len = read_pod<std::uint64_t>(in, file);
    std::string text(header_len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) throw ParseError(file, 0, "truncated header");

    Checkpoint c;
    try {
        const json header = json::parse(text);
        c.schema_version = header.at("schema_version").get<int>();
        c.kind = header.at("kind").get<std::string>();
        c.backbone = header.at("backbone").get<std::string>();
        c.architecture = header.at("architecture");
        c.config = train_config_from_json(header.at("config"));
        for (const auto& m : header.at("metrics")) {
            EpochMetrics e;
            e.epoch = m.at("epoch").get<int>();
            e.train_loss = m.at("train_loss").get<double>();
            e.validation_loss = optional_number(m, "validation_loss");
            e.validation_r = optional_number(m, "validation_r");
            c.metrics.push_back(e);
        }
    } catch (const json::exception& e) {
        throw ParseError(file, 0, std::string("bad checkpoint header: ") + e.what());
    }
    const auto count = read_pod<std::uint64_t>(in, file);
    c.weights.resize(static_cast<Eigen::Index>(count));
    if (!in.read(reinterpret_cast<char*>(c.weights.data()), static_cast<std::streamsize>(count * sizeof(float))))
        throw ParseError(file, 0, "truncated weights");
    return c;
}

void write_metrics_file(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write metrics '" + path.string() + "'");
    out << metrics_json(checkpoint).dump(2) << '\n';
}

}  // namespace nvi::nn

// SPDX-License-Identifier: Apache-2.0
#include "pulse/pulse.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitModelMismatch = 3;
constexpr int kExitHashMismatch = 4;
constexpr int kExitStore = 5;
constexpr int kExitSignature = 6;
constexpr int kExitProtocol = 7;

struct ErrorFamily {
    int code;
    const char* label;
};

ErrorFamily classify_error(const pulse::Error& err) {
    if (dynamic_cast<const pulse::HashMismatchError*>(&err))
        return {kExitHashMismatch, "hash mismatch"};
    if (dynamic_cast<const pulse::SignatureError*>(&err)) return {kExitSignature, "signature"};
    if (dynamic_cast<const pulse::ProtocolViolationError*>(&err))
        return {kExitProtocol, "protocol violation"};
    if (dynamic_cast<const pulse::StoreError*>(&err)) return {kExitStore, "store"};
    if (dynamic_cast<const pulse::ShapeMismatchError*>(&err))
        return {kExitModelMismatch, "shape mismatch"};
    if (dynamic_cast<const pulse::ModelMismatchError*>(&err))
        return {kExitModelMismatch, "model mismatch"};
    if (dynamic_cast<const pulse::FormatError*>(&err)) return {kExitFormat, "format"};
    return {kExitUsage, "usage"};
}

std::string fmt_general(double value, int precision = 9) {
    std::ostringstream out;
    out << std::setprecision(precision) << value;
    return out.str();
}

std::string fmt_fixed(double value, int places) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(places) << value;
    return out.str();
}

std::string fmt_sci(double value, int places = 6) {
    std::ostringstream out;
    out << std::scientific << std::setprecision(places) << value;
    return out.str();
}

void emit(bool as_json, const nlohmann::json& doc, const std::string& text) {
    if (as_json) {
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << text;
    }
}

pulse::SparseRepresentation parse_representation_flag(const std::string& name) {
    std::string canonical;
    for (char ch : name) {
        canonical +=
            ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    try {
        return pulse::representation_from_name(canonical);
    } catch (const pulse::FormatError&) {
        throw pulse::ArgumentError("unknown representation '" + name +
                                   "' (use coo-downscaled, coo-int32, or flat-int32)");
    }
}

pulse::CodecId parse_codec_flag(const std::string& name) {
    try {
        return pulse::codec_from_name(name);
    } catch (const pulse::Error&) {
        throw pulse::ArgumentError("unknown codec '" + name +
                                   "' (use identity, lz4, zstd-1, zstd-3, or gzip-6)");
    }
}

std::vector<std::int64_t> parse_shape_flag(const std::string& text) {
    std::vector<std::int64_t> shape;
    std::string part;
    std::istringstream stream(text);
    while (std::getline(stream, part, 'x')) {
        try {
            std::size_t used = 0;
            const long long extent = std::stoll(part, &used);
            if (used != part.size() || extent <= 0) throw std::invalid_argument(part);
            shape.push_back(extent);
        } catch (const std::exception&) {
            throw pulse::ArgumentError("bad shape '" + text + "' (use forms like 4096 or 128x64)");
        }
    }
    if (shape.empty()) throw pulse::ArgumentError("empty shape");
    return shape;
}

// Configuration layering: command-line flags (or their environment variables,
// which CLI11 applies when the flag is absent) override the config file,
// which overrides built-in defaults.
nlohmann::json load_config_file(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream file(path);
    if (!file) throw pulse::ArgumentError("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(file);
    } catch (const nlohmann::json::exception& err) {
        throw pulse::FormatError("config file " + path + ": " + err.what());
    }
}

template <typename T>
void layer_config(T& value, const CLI::Option* opt, const nlohmann::json& cfg, const char* key) {
    if (opt != nullptr && opt->count() > 0) return;
    const auto it = cfg.find(key);
    if (it == cfg.end()) return;
    try {
        value = it->get<T>();
    } catch (const nlohmann::json::exception& err) {
        throw pulse::FormatError(std::string("config key '") + key + "': " + err.what());
    }
}

struct StoreOptions {
    std::string config_path;
    std::string url;
    std::string region = "us-east-1";
    std::string access_key;
    std::string secret_key;
    CLI::Option* config_opt = nullptr;
    CLI::Option* url_opt = nullptr;
    CLI::Option* region_opt = nullptr;
    CLI::Option* access_opt = nullptr;
    CLI::Option* secret_opt = nullptr;

    void attach(CLI::App& cmd) {
        config_opt =
            cmd.add_option("--config", config_path, "JSON config file")->envname("PULSE_CONFIG");
        url_opt = cmd.add_option("--store", url,
                                 "store: a directory path or http(s)://host[:port]/bucket")
                      ->envname("PULSE_STORE");
        region_opt = cmd.add_option("--region", region, "S3 signing region")->envname("AWS_REGION");
        access_opt = cmd.add_option("--access-key", access_key, "S3 access key id")
                         ->envname("AWS_ACCESS_KEY_ID");
        secret_opt = cmd.add_option("--secret-key", secret_key, "S3 secret access key")
                         ->envname("AWS_SECRET_ACCESS_KEY");
    }

    nlohmann::json config() const { return load_config_file(config_path); }

    std::unique_ptr<pulse::ObjectStore> open(const nlohmann::json& cfg) {
        layer_config(url, url_opt, cfg, "store");
        layer_config(region, region_opt, cfg, "region");
        layer_config(access_key, access_opt, cfg, "access_key_id");
        layer_config(secret_key, secret_opt, cfg, "secret_access_key");
        if (url.empty()) {
            throw pulse::ArgumentError(
                "no store configured (pass --store, set PULSE_STORE, or add \"store\" to the "
                "config file)");
        }
        if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0) {
            const std::size_t host_start = url.find("//") + 2;
            const std::size_t slash = url.find('/', host_start);
            if (slash == std::string::npos || slash + 1 == url.size()) {
                throw pulse::ArgumentError("S3 store must be scheme://host[:port]/bucket");
            }
            pulse::S3Config config;
            config.endpoint = url.substr(0, slash);
            config.bucket = url.substr(slash + 1);
            while (!config.bucket.empty() && config.bucket.back() == '/') config.bucket.pop_back();
            if (config.bucket.find('/') != std::string::npos) {
                throw pulse::ArgumentError("S3 bucket name must not contain '/'");
            }
            config.region = region;
            if (access_key.empty() || secret_key.empty()) {
                throw pulse::ArgumentError(
                    "S3 store needs credentials (set AWS_ACCESS_KEY_ID and "
                    "AWS_SECRET_ACCESS_KEY)");
            }
            config.credentials = {access_key, secret_key};
            return std::make_unique<pulse::S3Store>(std::move(config));
        }
        std::string path = url;
        if (path.rfind("file://", 0) == 0) path = path.substr(7);
        return std::make_unique<pulse::LocalStore>(path);
    }
};

void write_checkpoint_atomic(const pulse::Checkpoint& checkpoint, const fs::path& path) {
    const fs::path tmp = path.string() + ".tmp";
    pulse::write_checkpoint(checkpoint, tmp);
    fs::rename(tmp, path);
}

void write_text_atomic(const std::string& text, const fs::path& path) {
    const fs::path tmp = path.string() + ".tmp";
    std::ofstream file(tmp, std::ios::trunc);
    file << text;
    file.flush();
    if (!file) throw pulse::Error("failed to write " + tmp.string());
    file.close();
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// keygen

struct KeygenOptions {
    std::string key_path;
    std::string pub_path;
    bool json = false;
};

void run_keygen(const KeygenOptions& opt) {
    const pulse::Signer signer = pulse::Signer::generate();
    pulse::save_signing_key(signer, opt.key_path);
    pulse::save_public_key(signer.verifier(), opt.pub_path);
    const std::string key_id = signer.key_id();

    nlohmann::json doc{
        {"key_id", key_id}, {"signing_key", opt.key_path}, {"public_key", opt.pub_path}};
    std::ostringstream text;
    text << "key_id: " << key_id << '\n'
         << "signing_key: " << opt.key_path << '\n'
         << "public_key: " << opt.pub_path << '\n';
    emit(opt.json, doc, text.str());
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
    std::vector<std::string> shapes;
    double sparsity = 0.99;
    std::int64_t cluster = 64;
    std::uint64_t seed = 0;
    double median = 0.0117;
    double sigma = 1.0;
    std::string out_prev;
    std::string out_curr;
    std::string out_dir;
    std::uint64_t chain = 0;
    bool json = false;
};

pulse::SyntheticSpec spec_from(const GenOptions& opt) {
    pulse::SyntheticSpec spec;
    spec.shapes.clear();
    for (const std::string& text : opt.shapes) spec.shapes.push_back(parse_shape_flag(text));
    if (spec.shapes.empty()) spec.shapes = {{256, 128}, {4096}};
    spec.sparsity = opt.sparsity;
    spec.cluster_width = opt.cluster;
    spec.seed = opt.seed;
    spec.median_magnitude = opt.median;
    spec.sigma = opt.sigma;
    return spec;
}

void run_gen(const GenOptions& opt) {
    const pulse::SyntheticSpec spec = spec_from(opt);

    if (opt.chain > 0) {
        if (opt.out_dir.empty()) {
            throw pulse::ArgumentError("--chain needs --out-dir");
        }
        fs::create_directories(opt.out_dir);
        std::vector<std::string> files;
        pulse::Checkpoint current = pulse::generate_base_checkpoint(spec);
        double sparsity_sum = 0.0;
        for (std::uint64_t step = 0; step <= opt.chain; ++step) {
            if (step > 0) {
                pulse::Checkpoint next = pulse::mutate_checkpoint(
                    current, spec.sparsity, spec.cluster_width, spec.seed + step, step);
                sparsity_sum += pulse::sparsity(next, current).sparsity;
                current = std::move(next);
            }
            const fs::path path =
                fs::path(opt.out_dir) / ("step_" + std::to_string(step) + ".pulc");
            pulse::write_checkpoint(current, path);
            files.push_back(path.string());
        }
        const double mean_sparsity =
            opt.chain > 0 ? sparsity_sum / static_cast<double>(opt.chain) : 1.0;

        nlohmann::json doc{{"seed", spec.seed},
                           {"steps", opt.chain},
                           {"mean_sparsity", mean_sparsity},
                           {"files", files}};
        std::ostringstream text;
        text << "seed: " << spec.seed << '\n'
             << "steps: " << opt.chain << '\n'
             << "mean_sparsity: " << fmt_fixed(mean_sparsity, 6) << '\n'
             << "out_dir: " << opt.out_dir << '\n';
        emit(opt.json, doc, text.str());
        return;
    }

    if (opt.out_prev.empty() || opt.out_curr.empty()) {
        throw pulse::ArgumentError(
            "gen needs --out-prev and --out-curr (or --chain with --out-dir)");
    }
    const auto [prev, curr] = pulse::generate_synthetic(spec);
    pulse::write_checkpoint(prev, opt.out_prev);
    pulse::write_checkpoint(curr, opt.out_curr);
    const pulse::SparsityReport achieved = pulse::sparsity(curr, prev);

    nlohmann::json doc{{"seed", spec.seed},
                       {"tensors", prev.tensors.size()},
                       {"elements", prev.total_elements()},
                       {"achieved_sparsity", achieved.sparsity},
                       {"prev", opt.out_prev},
                       {"curr", opt.out_curr}};
    std::ostringstream text;
    text << "seed: " << spec.seed << '\n'
         << "tensors: " << prev.tensors.size() << '\n'
         << "elements: " << prev.total_elements() << '\n'
         << "achieved_sparsity: " << fmt_fixed(achieved.sparsity, 6) << '\n'
         << "wrote: " << opt.out_prev << ' ' << opt.out_curr << '\n';
    emit(opt.json, doc, text.str());
}

// ---------------------------------------------------------------------------
// diff / apply / verify

struct DiffOptions {
    std::string prev_path;
    std::string curr_path;
    std::string out_path;
    std::string repr = "coo-downscaled";
    std::string codec = "zstd-1";
    bool json = false;
};

void run_diff(const DiffOptions& opt) {
    const pulse::Checkpoint previous = pulse::read_checkpoint(opt.prev_path);
    const pulse::Checkpoint current = pulse::read_checkpoint(opt.curr_path);
    const pulse::SparsePatch patch = pulse::encode(
        current, previous, parse_representation_flag(opt.repr), parse_codec_flag(opt.codec));
    const pulse::Bytes wire = pulse::write_patch_bytes(patch);
    pulse::detail::write_file_bytes(opt.out_path, wire);

    const std::uint64_t changed = static_cast<std::uint64_t>(patch.total_changes());
    const std::uint64_t total = current.total_elements();
    const double sparsity =
        total > 0 ? 1.0 - static_cast<double>(changed) / static_cast<double>(total) : 1.0;
    const double sparse_ratio =
        changed > 0 ? static_cast<double>(changed * 6) / static_cast<double>(wire.size()) : 0.0;
    const double full_ratio =
        changed > 0 ? static_cast<double>(total * 2) / static_cast<double>(wire.size()) : 0.0;

    nlohmann::json doc{{"base_step", patch.base_step}, {"target_step", patch.target_step},
                       {"changes", changed},           {"total_elements", total},
                       {"sparsity", sparsity},         {"sparse_ratio", sparse_ratio},
                       {"full_ratio", full_ratio},     {"patch_bytes", wire.size()},
                       {"out", opt.out_path}};
    std::ostringstream text;
    text << "base_step: " << patch.base_step << '\n'
         << "target_step: " << patch.target_step << '\n'
         << "changes: " << changed << '\n'
         << "sparsity: " << fmt_fixed(sparsity, 6) << '\n'
         << "sparse_ratio: " << fmt_general(sparse_ratio, 6) << '\n'
         << "full_ratio: " << fmt_general(full_ratio, 6) << '\n'
         << "patch_bytes: " << wire.size() << '\n'
         << "wrote: " << opt.out_path << '\n';
    emit(opt.json, doc, text.str());
}

struct ApplyOptions {
    std::string base_path;
    std::string patch_path;
    std::string out_path;
    bool no_verify = false;
    bool json = false;
};

void run_apply(const ApplyOptions& opt) {
    const pulse::Checkpoint base = pulse::read_checkpoint(opt.base_path);
    const pulse::SparsePatch patch = pulse::read_patch(opt.patch_path);
    if (opt.no_verify) {
        std::cerr << "pulse: warning: hash verification skipped (--no-verify)\n";
    }
    const pulse::Checkpoint result = pulse::decode(base, patch, !opt.no_verify);
    pulse::write_checkpoint(result, opt.out_path);
    const std::string hash = pulse::hash_weights(result).hex();

    nlohmann::json doc{{"target_step", result.step},
                       {"weights_hash", hash},
                       {"verified", !opt.no_verify},
                       {"out", opt.out_path}};
    std::ostringstream text;
    text << "target_step: " << result.step << '\n'
         << "weights_hash: " << hash << '\n'
         << "verified: " << (opt.no_verify ? "no" : "yes") << '\n'
         << "wrote: " << opt.out_path << '\n';
    emit(opt.json, doc, text.str());
}

struct VerifyOptions {
    std::string path;
    bool json = false;
};

void run_verify(const VerifyOptions& opt) {
    const pulse::Bytes bytes = pulse::detail::read_file_bytes(opt.path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "PULC", 4) == 0) {
        const pulse::Checkpoint checkpoint = pulse::read_checkpoint_bytes(bytes);
        checkpoint.validate();
        const std::string hash = pulse::hash_weights(checkpoint).hex();
        nlohmann::json doc{{"container", "checkpoint"},
                           {"step", checkpoint.step},
                           {"tensors", checkpoint.tensors.size()},
                           {"elements", checkpoint.total_elements()},
                           {"weights_hash", hash}};
        std::ostringstream text;
        text << "container: checkpoint\n"
             << "step: " << checkpoint.step << '\n'
             << "tensors: " << checkpoint.tensors.size() << '\n'
             << "elements: " << checkpoint.total_elements() << '\n'
             << "weights_hash: " << hash << '\n';
        emit(opt.json, doc, text.str());
        return;
    }
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "PULP", 4) == 0) {
        const pulse::SparsePatch patch = pulse::read_patch_bytes(bytes);
        nlohmann::json doc{{"container", "patch"},
                           {"base_step", patch.base_step},
                           {"target_step", patch.target_step},
                           {"changes", patch.total_changes()},
                           {"representation", pulse::representation_name(patch.representation)},
                           {"codec", pulse::codec_name(patch.codec)},
                           {"target_hash", patch.target_hash.hex()}};
        std::ostringstream text;
        text << "container: patch\n"
             << "base_step: " << patch.base_step << '\n'
             << "target_step: " << patch.target_step << '\n'
             << "changes: " << patch.total_changes() << '\n'
             << "representation: " << pulse::representation_name(patch.representation) << '\n'
             << "codec: " << pulse::codec_name(patch.codec) << '\n'
             << "target_hash: " << patch.target_hash.hex() << '\n';
        emit(opt.json, doc, text.str());
        return;
    }
    throw pulse::BadMagicError("not a checkpoint or patch file: " + opt.path);
}

// ---------------------------------------------------------------------------
// publish / sync / retain

struct PublishOptions {
    StoreOptions store;
    std::string checkpoint_path;
    std::string state_dir;
    std::string signing_key_path;
    std::uint64_t interval = 50;
    std::string repr = "coo-downscaled";
    std::string codec = "zstd-1";
    CLI::Option* key_opt = nullptr;
    CLI::Option* interval_opt = nullptr;
    CLI::Option* repr_opt = nullptr;
    CLI::Option* codec_opt = nullptr;
    bool json = false;
};

void run_publish(PublishOptions& opt) {
    const nlohmann::json cfg = opt.store.config();
    layer_config(opt.signing_key_path, opt.key_opt, cfg, "signing_key");
    layer_config(opt.interval, opt.interval_opt, cfg, "anchor_interval");
    layer_config(opt.repr, opt.repr_opt, cfg, "representation");
    layer_config(opt.codec, opt.codec_opt, cfg, "codec");
    if (opt.signing_key_path.empty()) {
        throw pulse::ArgumentError("publish needs a signing key (--signing-key or config)");
    }
    const std::unique_ptr<pulse::ObjectStore> store = opt.store.open(cfg);
    const pulse::Signer signer = pulse::load_signing_key(opt.signing_key_path);

    pulse::SyncConfig config;
    config.anchor_interval = opt.interval;
    config.representation = parse_representation_flag(opt.repr);
    config.codec = parse_codec_flag(opt.codec);

    const pulse::Checkpoint current = pulse::read_checkpoint(opt.checkpoint_path);
    fs::create_directories(opt.state_dir);
    const fs::path state_path = fs::path(opt.state_dir) / "publisher.pulc";

    std::vector<pulse::Manifest> manifests;
    if (fs::exists(state_path)) {
        const pulse::Checkpoint previous = pulse::read_checkpoint(state_path);
        manifests = pulse::publish_checkpoint(current, previous, *store, signer, config);
    } else {
        manifests.push_back(pulse::publish_initial(current, *store, signer, config));
    }
    write_checkpoint_atomic(current, state_path);

    std::vector<std::string> kinds;
    std::uint64_t anchor_step = current.step;
    for (const pulse::Manifest& manifest : manifests) {
        kinds.emplace_back(pulse::manifest_kind_name(manifest.kind));
        if (manifest.kind == pulse::ManifestKind::Delta) anchor_step = manifest.anchor_step;
    }
    const std::string hash = pulse::hash_weights(current).hex();

    nlohmann::json doc{{"published", kinds},
                       {"step", current.step},
                       {"anchor_step", anchor_step},
                       {"weights_hash", hash}};
    std::ostringstream text;
    text << "published:";
    for (const std::string& kind : kinds) text << ' ' << kind;
    text << '\n'
         << "step: " << current.step << '\n'
         << "anchor_step: " << anchor_step << '\n'
         << "weights_hash: " << hash << '\n';
    emit(opt.json, doc, text.str());
}

struct SyncOptions {
    StoreOptions store;
    std::string state_dir;
    std::string trust_path;
    std::string out_path;
    CLI::Option* trust_opt = nullptr;
    bool json = false;
};

std::optional<pulse::SyncState> load_sync_state(const fs::path& state_dir) {
    const fs::path checkpoint_path = state_dir / "consumer.pulc";
    const fs::path meta_path = state_dir / "consumer.json";
    const bool have_checkpoint = fs::exists(checkpoint_path);
    const bool have_meta = fs::exists(meta_path);
    if (!have_checkpoint && !have_meta) return std::nullopt;
    if (have_checkpoint != have_meta) {
        throw pulse::ArgumentError("sync state directory is incomplete: " + state_dir.string());
    }
    std::ifstream meta_file(meta_path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_file);
    } catch (const nlohmann::json::exception& err) {
        throw pulse::ArgumentError("sync state metadata is corrupt: " + std::string(err.what()));
    }
    pulse::SyncState state;
    try {
        state.step = meta.at("step").get<std::uint64_t>();
        state.weights_hash =
            pulse::WeightsHash::from_hex(meta.at("weights_hash").get<std::string>());
        state.last_anchor_step = meta.at("last_anchor_step").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& err) {
        throw pulse::ArgumentError("sync state metadata is corrupt: " + std::string(err.what()));
    }
    state.checkpoint = pulse::read_checkpoint(checkpoint_path);
    return state;
}

void save_sync_state(const pulse::SyncState& state, const fs::path& state_dir) {
    write_checkpoint_atomic(state.checkpoint, state_dir / "consumer.pulc");
    const nlohmann::json meta{{"step", state.step},
                              {"weights_hash", state.weights_hash.hex()},
                              {"last_anchor_step", state.last_anchor_step}};
    write_text_atomic(meta.dump(2) + "\n", state_dir / "consumer.json");
}

void run_sync(SyncOptions& opt) {
    const nlohmann::json cfg = opt.store.config();
    layer_config(opt.trust_path, opt.trust_opt, cfg, "trust");
    if (opt.trust_path.empty()) {
        throw pulse::ArgumentError("sync needs a trusted public key (--trust or config)");
    }
    const std::unique_ptr<pulse::ObjectStore> store = opt.store.open(cfg);
    const pulse::Verifier verifier = pulse::load_public_key(opt.trust_path);

    fs::create_directories(opt.state_dir);
    std::optional<pulse::SyncState> local = load_sync_state(opt.state_dir);
    const pulse::SyncReport report = pulse::synchronize(*store, verifier, std::move(local));
    save_sync_state(report.state, opt.state_dir);
    if (!opt.out_path.empty()) pulse::write_checkpoint(report.state.checkpoint, opt.out_path);

    const bool already = report.path == pulse::SyncPath::AlreadySynchronized;
    const std::string path_label = already
                                       ? "already synchronized"
                                       : std::string(pulse::sync_path_name(report.path)) + " path";

    nlohmann::json doc{{"path", std::string(pulse::sync_path_name(report.path))},
                       {"deltas_applied", report.deltas_applied},
                       {"full_downloaded", report.full_downloaded},
                       {"recovered", report.recovered},
                       {"step", report.state.step},
                       {"weights_hash", report.state.weights_hash.hex()}};
    std::ostringstream text;
    text << "path: " << path_label << '\n'
         << "applied " << report.deltas_applied << " deltas\n"
         << "full_downloaded: " << (report.full_downloaded ? "yes" : "no") << '\n'
         << "recovered: " << (report.recovered ? "yes" : "no") << '\n'
         << "step: " << report.state.step << '\n'
         << "weights_hash: " << report.state.weights_hash.hex() << '\n';
    if (!opt.out_path.empty()) text << "wrote: " << opt.out_path << '\n';
    emit(opt.json, doc, text.str());
}

struct RetainOptions {
    StoreOptions store;
    std::uint64_t max_deltas = 100;
    std::uint64_t max_fulls = 10;
    CLI::Option* deltas_opt = nullptr;
    CLI::Option* fulls_opt = nullptr;
    bool verbose = false;
    bool json = false;
};

void run_retain(RetainOptions& opt) {
    const nlohmann::json cfg = opt.store.config();
    layer_config(opt.max_deltas, opt.deltas_opt, cfg, "max_deltas");
    layer_config(opt.max_fulls, opt.fulls_opt, cfg, "max_fulls");
    const std::unique_ptr<pulse::ObjectStore> store = opt.store.open(cfg);

    pulse::RetentionPolicy policy;
    policy.max_deltas = opt.max_deltas;
    policy.max_fulls = opt.max_fulls;
    const std::vector<std::string> deleted = pulse::apply_retention(*store, policy);

    std::uint64_t deltas = 0;
    std::uint64_t fulls = 0;
    std::uint64_t manifests = 0;
    std::uint64_t ready_markers = 0;
    for (const std::string& key : deleted) {
        if (key.find("/delta.pulp") != std::string::npos)
            ++deltas;
        else if (key.find("/full.pulc") != std::string::npos)
            ++fulls;
        else if (key.find("/manifest.json") != std::string::npos)
            ++manifests;
        else if (key.rfind("ready/", 0) == 0)
            ++ready_markers;
    }

    nlohmann::json doc{{"deleted", deleted.size()},
                       {"deltas", deltas},
                       {"fulls", fulls},
                       {"manifests", manifests},
                       {"ready_markers", ready_markers},
                       {"deleted_keys", deleted}};
    std::ostringstream text;
    if (opt.verbose) {
        for (const std::string& key : deleted) text << "deleted: " << key << '\n';
    }
    text << "deleted: " << deleted.size() << '\n'
         << "deltas: " << deltas << '\n'
         << "fulls: " << fulls << '\n'
         << "manifests: " << manifests << '\n'
         << "ready_markers: " << ready_markers << '\n';
    emit(opt.json, doc, text.str());
}

// ---------------------------------------------------------------------------
// plan

struct PlanOptions {
    std::string bandwidth;
    std::string payload = "194MB";
    std::string compute = "50s";
    std::string profiles_path;
    std::vector<std::string> curve;
    bool derived_boundaries = false;
    bool latency = false;
    std::string anchor = "14GB";
    std::string delta_size = "108MB";
    std::uint64_t slow_deltas = 9;
    bool json = false;
};

std::vector<pulse::CompressionProfile> load_profiles(const std::string& path) {
    if (path.empty()) return pulse::default_profiles();
    std::ifstream file(path);
    if (!file) throw pulse::ArgumentError("cannot open profiles file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(file);
    } catch (const nlohmann::json::exception& err) {
        throw pulse::FormatError("profiles file " + path + ": " + err.what());
    }
    if (!doc.is_array() || doc.empty()) {
        throw pulse::FormatError("profiles file must be a non-empty JSON array");
    }
    std::vector<pulse::CompressionProfile> profiles;
    for (const nlohmann::json& entry : doc) {
        try {
            pulse::CompressionProfile profile;
            profile.codec = pulse::codec_from_name(entry.at("codec").get<std::string>());
            profile.sparse_ratio = entry.at("sparse_ratio").get<double>();
            profile.encode_bps = entry.at("encode_bps").get<double>();
            profile.decode_bps = entry.at("decode_bps").get<double>();
            profile.validate();
            profiles.push_back(profile);
        } catch (const nlohmann::json::exception& err) {
            throw pulse::FormatError("profiles file " + path + ": " + err.what());
        }
    }
    return profiles;
}

void run_plan(const PlanOptions& opt) {
    const double compute_seconds = pulse::parse_seconds(opt.compute);
    const double payload_bytes = pulse::parse_bytes(opt.payload);

    if (!opt.curve.empty()) {
        std::vector<double> grid;
        for (const std::string& point : opt.curve) grid.push_back(pulse::parse_bandwidth(point));
        const auto curve = pulse::utilization_curve(compute_seconds, payload_bytes, grid);
        if (opt.json) {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& [bandwidth_bps, fraction] : curve) {
                rows.push_back({{"bandwidth_bps", bandwidth_bps}, {"utilization", fraction}});
            }
            std::cout << rows.dump(2) << '\n';
        } else {
            std::cout << pulse::utilization_curve_csv(curve);
        }
        return;
    }

    if (opt.bandwidth.empty()) {
        throw pulse::ArgumentError("plan needs --bandwidth (or --curve)");
    }
    const double bandwidth_bps = pulse::parse_bandwidth(opt.bandwidth);
    const std::vector<pulse::CompressionProfile> profiles = load_profiles(opt.profiles_path);

    if (opt.latency) {
        pulse::LatencyProfile profile;
        profile.bandwidth_bps = bandwidth_bps;
        pulse::LatencyScenario scenario;
        scenario.anchor_bytes = pulse::parse_bytes(opt.anchor);
        scenario.delta_bytes = pulse::parse_bytes(opt.delta_size);
        scenario.slow_path_deltas = opt.slow_deltas;
        const pulse::SyncLatencyReport report = pulse::model_sync_latency(profile, scenario);

        std::ostringstream text;
        const auto print_path = [&text](const char* name, const pulse::PhaseBreakdown& phases) {
            text << name << ": " << fmt_fixed(phases.total(), 6) << " s\n"
                 << "  full_download: " << fmt_fixed(phases.full_download, 6) << '\n'
                 << "  delta_download: " << fmt_fixed(phases.delta_download, 6) << '\n'
                 << "  decompression: " << fmt_fixed(phases.decompression, 6) << '\n'
                 << "  application: " << fmt_fixed(phases.application, 6) << '\n'
                 << "  hash_verification: " << fmt_fixed(phases.hash_verification, 6) << '\n';
        };
        print_path("fast_path", report.fast_path);
        print_path("slow_path", report.slow_path);
        print_path("cold_start", report.cold_start);
        emit(opt.json, pulse::latency_report_to_json(report), text.str());
        return;
    }

    const pulse::LinkModel link{bandwidth_bps, payload_bytes};
    const pulse::PlanReport report = pulse::plan_transfer(profiles, link);
    pulse::RegimeBoundaries boundaries;
    if (opt.derived_boundaries) {
        boundaries = pulse::derive_regime_boundaries(profiles, payload_bytes);
    }
    const pulse::CodecId tier = pulse::select_codec(bandwidth_bps, boundaries);
    const double fraction = pulse::utilization(compute_seconds, payload_bytes, bandwidth_bps);

    nlohmann::json doc = pulse::plan_report_to_json(report);
    doc["tier"] = pulse::codec_name(tier);
    doc["utilization"] = fraction;
    doc["compute_seconds"] = compute_seconds;

    std::ostringstream text;
    text << "bandwidth_bps: " << fmt_general(bandwidth_bps) << '\n'
         << "payload_bytes: " << fmt_general(payload_bytes) << '\n'
         << "tier: " << pulse::codec_name(tier) << '\n'
         << "chosen: " << pulse::codec_name(report.chosen) << '\n';
    for (const pulse::CodecPlan& plan : report.totals) {
        text << "total " << pulse::codec_name(plan.codec) << ": "
             << fmt_fixed(plan.total_seconds, 6) << " s\n";
    }
    for (const pulse::CodecCrossover& crossover : report.crossovers) {
        text << "crossover " << pulse::codec_name(crossover.faster_overhead) << '/'
             << pulse::codec_name(crossover.slower_overhead) << ": ";
        if (crossover.bandwidth_bps) {
            text << fmt_general(*crossover.bandwidth_bps) << " bps\n";
        } else {
            text << "none\n";
        }
    }
    text << "utilization: " << fmt_fixed(fraction, 6) << '\n'
         << "compute_seconds: " << fmt_general(compute_seconds) << '\n';
    emit(opt.json, doc, text.str());
}

// ---------------------------------------------------------------------------
// analyze

struct AbsorbOptions {
    double weight = 0.0;
    double delta = 0.0;
    bool json = false;
};

void run_absorb(const AbsorbOptions& opt) {
    const pulse::Bf16 weight = pulse::round_to_bf16(opt.weight);
    const bool absorbed = pulse::is_absorbed_exact(weight, opt.delta);
    const double threshold = pulse::absorption_threshold(weight);

    std::ostringstream bits;
    bits << "0x" << std::hex << std::setw(4) << std::setfill('0') << weight.bits;
    nlohmann::json doc{{"weight", weight.to_double()},
                       {"weight_bits", bits.str()},
                       {"delta", opt.delta},
                       {"absorbed", absorbed},
                       {"threshold", threshold}};
    std::ostringstream text;
    text << "weight: " << fmt_general(weight.to_double()) << '\n'
         << "weight_bits: " << bits.str() << '\n'
         << "delta: " << fmt_general(opt.delta) << '\n'
         << "absorbed: " << (absorbed ? "yes" : "no") << '\n'
         << "threshold: " << fmt_sci(threshold) << '\n';
    emit(opt.json, doc, text.str());
}

struct BoundOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double t = 0.0;
    CLI::Option* t_opt = nullptr;
    bool json = false;
};

void run_bound(const BoundOptions& opt) {
    pulse::AdamConfig cfg;
    cfg.beta1 = opt.beta1;
    cfg.beta2 = opt.beta2;
    const bool has_t = opt.t_opt != nullptr && opt.t_opt->count() > 0;
    const double bound = has_t ? pulse::adam_bound(cfg, opt.t) : pulse::adam_bound_asymptote(cfg);

    nlohmann::json doc{{"beta1", opt.beta1}, {"beta2", opt.beta2}, {"bound", bound}};
    if (has_t) doc["t"] = opt.t;
    std::ostringstream text;
    if (has_t) text << "t: " << fmt_general(opt.t) << '\n';
    text << "adam_bound: " << fmt_fixed(bound, 4) << '\n';
    emit(opt.json, doc, text.str());
}

struct CriticalOptions {
    double eta = 3e-6;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::string mode = "effective";
    bool json = false;
};

pulse::CriticalWeightMode parse_mode_flag(const std::string& mode) {
    if (mode == "effective") return pulse::CriticalWeightMode::Effective;
    if (mode == "theoretical") return pulse::CriticalWeightMode::Theoretical;
    throw pulse::ArgumentError("unknown mode '" + mode + "' (use effective or theoretical)");
}

void run_critical(const CriticalOptions& opt) {
    pulse::AdamConfig cfg;
    cfg.eta = opt.eta;
    cfg.beta1 = opt.beta1;
    cfg.beta2 = opt.beta2;
    const double value = pulse::critical_weight(cfg, parse_mode_flag(opt.mode));

    nlohmann::json doc{{"eta", opt.eta}, {"mode", opt.mode}, {"critical_weight", value}};
    std::ostringstream text;
    text << "eta: " << fmt_general(opt.eta) << '\n'
         << "mode: " << opt.mode << '\n'
         << "critical_weight: " << fmt_sci(value) << '\n';
    emit(opt.json, doc, text.str());
}

struct FrozenOptions {
    std::string path;
    double eta = 3e-6;
    std::string mode = "effective";
    double threshold = 0.0;
    CLI::Option* threshold_opt = nullptr;
    bool json = false;
};

void run_frozen(const FrozenOptions& opt) {
    const pulse::Checkpoint checkpoint = pulse::read_checkpoint(opt.path);
    double threshold = opt.threshold;
    if (opt.threshold_opt == nullptr || opt.threshold_opt->count() == 0) {
        pulse::AdamConfig cfg;
        cfg.eta = opt.eta;
        threshold = pulse::critical_weight(cfg, parse_mode_flag(opt.mode));
    }
    const double fraction = pulse::frozen_fraction(checkpoint, threshold);

    nlohmann::json doc{{"threshold", threshold},
                       {"frozen_fraction", fraction},
                       {"elements", checkpoint.total_elements()}};
    std::ostringstream text;
    text << "threshold: " << fmt_sci(threshold) << '\n'
         << "frozen_fraction: " << fmt_fixed(fraction, 6) << '\n'
         << "elements: " << checkpoint.total_elements() << '\n';
    emit(opt.json, doc, text.str());
}

struct SparsityOptions {
    std::string prev_path;
    std::string curr_path;
    std::uint64_t k = 1;
    bool json = false;
};

void run_sparsity(const SparsityOptions& opt) {
    const pulse::Checkpoint prev = pulse::read_checkpoint(opt.prev_path);
    const pulse::Checkpoint curr = pulse::read_checkpoint(opt.curr_path);
    const pulse::SparsityReport report = pulse::sparsity(curr, prev, opt.k);

    nlohmann::json doc{{"k", report.k},
                       {"changed", report.changed},
                       {"total", report.total},
                       {"sparsity", report.sparsity}};
    std::ostringstream text;
    text << "k: " << report.k << '\n'
         << "changed: " << report.changed << '\n'
         << "total: " << report.total << '\n'
         << "sparsity: " << fmt_fixed(report.sparsity, 6) << '\n';
    emit(opt.json, doc, text.str());
}

struct AdamSimOptions {
    bool adversarial = false;
    std::uint64_t quiet_steps = 100'000;
    double quiet_grad = 1e-20;
    std::uint64_t loud_steps = 50;
    double loud_grad = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eta = 3e-6;
    double epsilon = 1e-8;
    bool csv = false;
    bool json = false;
};

void run_adamsim(const AdamSimOptions& opt) {
    pulse::AdamConfig cfg;
    cfg.eta = opt.eta;
    cfg.beta1 = opt.beta1;
    cfg.beta2 = opt.beta2;
    cfg.epsilon = opt.epsilon;

    // --adversarial is the documented spike scenario; explicit flags carve
    // out any other two-regime schedule.
    const std::uint64_t quiet_steps = opt.adversarial ? 100'000 : opt.quiet_steps;
    const double quiet_grad = opt.adversarial ? 1e-20 : opt.quiet_grad;
    const std::uint64_t loud_steps = opt.adversarial ? 50 : opt.loud_steps;
    const double loud_grad = opt.adversarial ? 1.0 : opt.loud_grad;

    const std::vector<double> gradients =
        pulse::regime_switch_gradients(quiet_steps, quiet_grad, loud_steps, loud_grad);
    const pulse::RatioTrajectory trajectory =
        pulse::simulate_adam_ratio(gradients, cfg, quiet_steps);

    if (opt.csv) {
        std::cout << "step,ratio,bound\n";
        for (std::size_t i = 0; i < trajectory.ratios.size(); ++i) {
            const double t = static_cast<double>(i + 1);
            std::cout << (i + 1) << ',' << fmt_general(trajectory.ratios[i], 12) << ','
                      << fmt_general(pulse::adam_bound(cfg, t), 12) << '\n';
        }
        return;
    }

    bool within_bound = true;
    for (std::size_t i = 0; i < trajectory.ratios.size(); ++i) {
        const double bound = pulse::adam_bound(cfg, static_cast<double>(i + 1));
        if (trajectory.ratios[i] > bound * (1.0 + 1e-12)) {
            within_bound = false;
            break;
        }
    }

    nlohmann::json doc{{"steps", trajectory.ratios.size()},
                       {"phase_boundary", trajectory.phase_boundary},
                       {"peak_ratio", trajectory.peak_value},
                       {"peak_step", trajectory.peak_step},
                       {"peak_steps_after_boundary", trajectory.peak_steps_after_boundary()},
                       {"within_bound", within_bound}};
    std::ostringstream text;
    text << "steps: " << trajectory.ratios.size() << '\n'
         << "phase_boundary: " << trajectory.phase_boundary << '\n'
         << "peak_ratio: " << fmt_fixed(trajectory.peak_value, 4) << '\n'
         << "peak_step: " << trajectory.peak_step << '\n'
         << "peak_steps_after_boundary: " << trajectory.peak_steps_after_boundary() << '\n'
         << "within_bound: " << (within_bound ? "yes" : "no") << '\n';
    emit(opt.json, doc, text.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse checkpoint diffing, synchronization, and transfer planning"};
    app.require_subcommand(1);

    auto keygen = std::make_shared<KeygenOptions>();
    CLI::App* keygen_cmd = app.add_subcommand("keygen", "generate an ed25519 signing key pair");
    keygen_cmd->add_option("--key", keygen->key_path, "signing key output path")->required();
    keygen_cmd->add_option("--pub", keygen->pub_path, "public key output path")->required();
    keygen_cmd->add_flag("--json", keygen->json, "print JSON");
    keygen_cmd->callback([keygen] { run_keygen(*keygen); });

    auto gen = std::make_shared<GenOptions>();
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate synthetic checkpoint data");
    gen_cmd->add_option("--shape", gen->shapes, "tensor shape, e.g. 128x64 (repeatable)");
    gen_cmd->add_option("--sparsity", gen->sparsity, "target bitwise-identical fraction");
    gen_cmd->add_option("--cluster", gen->cluster, "change cluster width");
    gen_cmd->add_option("--seed", gen->seed, "generator seed");
    gen_cmd->add_option("--median", gen->median, "median weight magnitude");
    gen_cmd->add_option("--sigma", gen->sigma, "log-normal shape parameter");
    gen_cmd->add_option("--out-prev", gen->out_prev, "previous checkpoint output path");
    gen_cmd->add_option("--out-curr", gen->out_curr, "current checkpoint output path");
    gen_cmd->add_option("--chain", gen->chain,
                        "write a chain of N+1 checkpoints instead of a pair");
    gen_cmd->add_option("--out-dir", gen->out_dir, "chain output directory");
    gen_cmd->add_flag("--json", gen->json, "print JSON");
    gen_cmd->callback([gen] { run_gen(*gen); });

    auto diff = std::make_shared<DiffOptions>();
    CLI::App* diff_cmd =
        app.add_subcommand("diff", "encode a sparse patch between two checkpoints");
    diff_cmd->add_option("prev", diff->prev_path, "previous checkpoint (.pulc)")->required();
    diff_cmd->add_option("curr", diff->curr_path, "current checkpoint (.pulc)")->required();
    diff_cmd->add_option("out", diff->out_path, "patch output path (.pulp)")->required();
    diff_cmd->add_option("--repr", diff->repr, "sparse representation");
    diff_cmd->add_option("--codec", diff->codec, "compression codec");
    diff_cmd->add_flag("--json", diff->json, "print JSON");
    diff_cmd->callback([diff] { run_diff(*diff); });

    auto apply = std::make_shared<ApplyOptions>();
    CLI::App* apply_cmd = app.add_subcommand("apply", "apply a sparse patch to a checkpoint");
    apply_cmd->add_option("base", apply->base_path, "base checkpoint (.pulc)")->required();
    apply_cmd->add_option("patch", apply->patch_path, "patch to apply (.pulp)")->required();
    apply_cmd->add_option("out", apply->out_path, "reconstructed checkpoint output path")
        ->required();
    apply_cmd->add_flag("--no-verify", apply->no_verify, "skip hash verification");
    apply_cmd->add_flag("--json", apply->json, "print JSON");
    apply_cmd->callback([apply] { run_apply(*apply); });

    auto verify = std::make_shared<VerifyOptions>();
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "parse and verify a checkpoint or patch file");
    verify_cmd->add_option("file", verify->path, "file to inspect")->required();
    verify_cmd->add_flag("--json", verify->json, "print JSON");
    verify_cmd->callback([verify] { run_verify(*verify); });

    auto publish = std::make_shared<PublishOptions>();
    CLI::App* publish_cmd = app.add_subcommand("publish", "publish a checkpoint to the store");
    publish->store.attach(*publish_cmd);
    publish_cmd->add_option("checkpoint", publish->checkpoint_path, "checkpoint to publish (.pulc)")
        ->required();
    publish_cmd->add_option("--state-dir", publish->state_dir, "publisher state directory")
        ->required();
    publish->key_opt =
        publish_cmd
            ->add_option("--signing-key", publish->signing_key_path, "ed25519 signing key file")
            ->envname("PULSE_SIGNING_KEY");
    publish->interval_opt =
        publish_cmd->add_option("--interval", publish->interval, "anchor interval k")
            ->envname("PULSE_ANCHOR_INTERVAL");
    publish->repr_opt = publish_cmd->add_option("--repr", publish->repr, "sparse representation")
                            ->envname("PULSE_REPRESENTATION");
    publish->codec_opt = publish_cmd->add_option("--codec", publish->codec, "compression codec")
                             ->envname("PULSE_CODEC");
    publish_cmd->add_flag("--json", publish->json, "print JSON");
    publish_cmd->callback([publish] { run_publish(*publish); });

    auto sync = std::make_shared<SyncOptions>();
    CLI::App* sync_cmd = app.add_subcommand("sync", "synchronize local state with the store");
    sync->store.attach(*sync_cmd);
    sync_cmd->add_option("--state-dir", sync->state_dir, "consumer state directory")->required();
    sync->trust_opt = sync_cmd->add_option("--trust", sync->trust_path, "trusted public key file")
                          ->envname("PULSE_TRUST");
    sync_cmd->add_option("--out", sync->out_path, "also write the checkpoint here");
    sync_cmd->add_flag("--json", sync->json, "print JSON");
    sync_cmd->callback([sync] { run_sync(*sync); });

    auto retain = std::make_shared<RetainOptions>();
    CLI::App* retain_cmd =
        app.add_subcommand("retain", "delete objects outside the retention windows");
    retain->store.attach(*retain_cmd);
    retain->deltas_opt =
        retain_cmd->add_option("--max-deltas", retain->max_deltas, "newest delta steps to keep");
    retain->fulls_opt =
        retain_cmd->add_option("--max-fulls", retain->max_fulls, "newest full steps to keep");
    retain_cmd->add_flag("--verbose", retain->verbose, "list deleted keys");
    retain_cmd->add_flag("--json", retain->json, "print JSON");
    retain_cmd->callback([retain] { run_retain(*retain); });

    auto plan = std::make_shared<PlanOptions>();
    CLI::App* plan_cmd =
        app.add_subcommand("plan", "codec selection, transfer time, and latency model");
    plan_cmd->add_option("--bandwidth", plan->bandwidth, "link bandwidth, e.g. 400Mbit");
    plan_cmd->add_option("--payload", plan->payload, "uncompressed sparse payload, e.g. 194MB");
    plan_cmd->add_option("--compute", plan->compute, "compute time per step, e.g. 50s");
    plan_cmd->add_option("--profiles", plan->profiles_path, "JSON file of compression profiles");
    plan_cmd->add_option("--curve", plan->curve, "emit a utilization CSV over these bandwidths")
        ->delimiter(',');
    plan_cmd->add_flag("--derived-boundaries", plan->derived_boundaries,
                       "derive selection tiers from the profiles instead of the published ones");
    plan_cmd->add_flag("--latency", plan->latency, "print the synchronization latency breakdown");
    plan_cmd->add_option("--anchor", plan->anchor, "full checkpoint wire size");
    plan_cmd->add_option("--delta-size", plan->delta_size, "delta wire size");
    plan_cmd->add_option("--slow-deltas", plan->slow_deltas,
                         "delta chain length for the slow path");
    plan_cmd->add_flag("--json", plan->json, "print JSON");
    plan_cmd->callback([plan] { run_plan(*plan); });

    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "numeric analyses of weights and updates");
    analyze_cmd->require_subcommand(1);

    auto absorb = std::make_shared<AbsorbOptions>();
    CLI::App* absorb_cmd =
        analyze_cmd->add_subcommand("absorb", "does this update survive BF16 rounding?");
    absorb_cmd->add_option("--weight", absorb->weight, "stored weight value")->required();
    absorb_cmd->add_option("--delta", absorb->delta, "update to add")->required();
    absorb_cmd->add_flag("--json", absorb->json, "print JSON");
    absorb_cmd->callback([absorb] { run_absorb(*absorb); });

    auto bound = std::make_shared<BoundOptions>();
    CLI::App* bound_cmd = analyze_cmd->add_subcommand("bound", "Adam update-ratio bound");
    bound_cmd->add_option("--beta1", bound->beta1, "first-moment decay");
    bound_cmd->add_option("--beta2", bound->beta2, "second-moment decay");
    bound->t_opt = bound_cmd->add_option("--t", bound->t, "step count (omit for the asymptote)");
    bound_cmd->add_flag("--json", bound->json, "print JSON");
    bound_cmd->callback([bound] { run_bound(*bound); });

    auto critical = std::make_shared<CriticalOptions>();
    CLI::App* critical_cmd =
        analyze_cmd->add_subcommand("critical", "weight magnitude where updates start absorbing");
    critical_cmd->add_option("--eta", critical->eta, "learning rate");
    critical_cmd->add_option("--beta1", critical->beta1, "first-moment decay");
    critical_cmd->add_option("--beta2", critical->beta2, "second-moment decay");
    critical_cmd->add_option("--mode", critical->mode, "effective or theoretical");
    critical_cmd->add_flag("--json", critical->json, "print JSON");
    critical_cmd->callback([critical] { run_critical(*critical); });

    auto frozen = std::make_shared<FrozenOptions>();
    CLI::App* frozen_cmd =
        analyze_cmd->add_subcommand("frozen", "fraction of weights above a magnitude threshold");
    frozen_cmd->add_option("file", frozen->path, "checkpoint to scan (.pulc)")->required();
    frozen_cmd->add_option("--eta", frozen->eta, "learning rate for the derived threshold");
    frozen_cmd->add_option("--mode", frozen->mode, "effective or theoretical");
    frozen->threshold_opt =
        frozen_cmd->add_option("--threshold", frozen->threshold, "explicit magnitude threshold");
    frozen_cmd->add_flag("--json", frozen->json, "print JSON");
    frozen_cmd->callback([frozen] { run_frozen(*frozen); });

    auto sparsity = std::make_shared<SparsityOptions>();
    CLI::App* sparsity_cmd = analyze_cmd->add_subcommand(
        "sparsity", "bitwise-identical fraction between two checkpoints");
    sparsity_cmd->add_option("prev", sparsity->prev_path, "earlier checkpoint (.pulc)")->required();
    sparsity_cmd->add_option("curr", sparsity->curr_path, "later checkpoint (.pulc)")->required();
    sparsity_cmd->add_option("--k", sparsity->k, "step gap label for the report");
    sparsity_cmd->add_flag("--json", sparsity->json, "print JSON");
    sparsity_cmd->callback([sparsity] { run_sparsity(*sparsity); });

    auto adamsim = std::make_shared<AdamSimOptions>();
    CLI::App* adamsim_cmd =
        analyze_cmd->add_subcommand("adamsim", "scalar Adam update-ratio simulation");
    adamsim_cmd->add_flag("--adversarial", adamsim->adversarial,
                          "long quiet phase then a gradient spike");
    adamsim_cmd->add_option("--quiet-steps", adamsim->quiet_steps, "steps before the switch");
    adamsim_cmd->add_option("--quiet-grad", adamsim->quiet_grad, "gradient before the switch");
    adamsim_cmd->add_option("--loud-steps", adamsim->loud_steps, "steps after the switch");
    adamsim_cmd->add_option("--loud-grad", adamsim->loud_grad, "gradient after the switch");
    adamsim_cmd->add_option("--beta1", adamsim->beta1, "first-moment decay");
    adamsim_cmd->add_option("--beta2", adamsim->beta2, "second-moment decay");
    adamsim_cmd->add_option("--eta", adamsim->eta, "learning rate");
    adamsim_cmd->add_option("--epsilon", adamsim->epsilon, "denominator epsilon");
    adamsim_cmd->add_flag("--csv", adamsim->csv, "emit step,ratio,bound CSV");
    adamsim_cmd->add_flag("--json", adamsim->json, "print JSON");
    adamsim_cmd->callback([adamsim] { run_adamsim(*adamsim); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kExitUsage;
    } catch (const pulse::Error& err) {
        const ErrorFamily family = classify_error(err);
        const std::string_view what = err.what();
        if (what.rfind(family.label, 0) == 0) {
            std::cerr << "pulse: " << what << '\n';
        } else {
            std::cerr << "pulse: " << family.label << ": " << what << '\n';
        }
        return family.code;
    } catch (const std::exception& err) {
        std::cerr << "pulse: " << err.what() << '\n';
        return kExitUsage;
    }
    return 0;
}

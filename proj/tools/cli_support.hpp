#pragma once

// Plumbing shared by the heatmetrics subcommands: exit-code errors, layered
// run configuration, config hashing, classifier specs and the job pool.

#include "heatmetrics/heatmetrics.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace heatmetrics::cli {

enum ExitCode : int { kOk = 0, kComputeError = 1, kInputError = 2 };

/// Input limit for quadratic classifier specs.
inline constexpr std::size_t kQuadraticMaxInputs = 4096;

/// Failure with a fixed process exit code.
class Failure : public std::runtime_error {
public:
    Failure(ExitCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    [[nodiscard]] ExitCode code() const { return code_; }

private:
    ExitCode code_;
};

[[noreturn]] inline void input_error(const std::string& msg) { throw Failure(kInputError, msg); }

/// Runs `load` and reports any library error as an input error prefixed by `what`.
template <typename F>
auto load_input(const std::string& what, F&& load) -> decltype(load()) {
    try {
        return load();
    } catch (const Failure&) {
        throw;
    } catch (const std::exception& e) {
        input_error(what + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Run configuration

inline ordered_json default_config() {
    ordered_json c;
    c["seed"] = 0;
    c["format"] = "json";
    c["jobs"] = 0;
    c["metrics"] = {{"method", "external"}, {"k", 100}, {"normalize", false}, {"bins", 25}};
    c["explain"] = {{"method", "sensitivity"}, {"samples", 25}, {"noise_scale", 0.15}, {"steps", 25}};
    c["deletion"] = {{"bins", 25}};
    c["partswap"] = {{"parts", {"eyes", "mouth", "nose"}}};
    c["visualize"] = {{"modes", {"enhanced", "gaussian", "blobs", "semantic"}},
                      {"clip_percentile", 99.0},
                      {"smooth_std", 1.5},
                      {"temporal_std", 0.0},
                      {"n_std", 2.0},
                      {"scales", {1.0, 2.0, 4.0, 8.0}},
                      {"threshold", 1e-4},
                      {"alpha", 0.5},
                      {"colormap", "viridis"}};
    return c;
}

/// Replaces base[key] with `value`, keeping the value type of the default.
inline void set_value(ordered_json& slot, const ordered_json& value, const std::string& where) {
    auto mismatch = [&] { input_error("config: '" + where + "' has the wrong type"); };
    if (slot.is_boolean()) {
        if (!value.is_boolean()) mismatch();
        slot = value;
    } else if (slot.is_number_integer()) {
        if (!value.is_number()) mismatch();
        const double d = value.get<double>();
        if (d < 0 || d != std::floor(d)) input_error("config: '" + where + "' must be a nonnegative integer");
        slot = value.get<std::uint64_t>();
    } else if (slot.is_number()) {
        if (!value.is_number()) mismatch();
        slot = value.get<double>();
    } else if (slot.is_string()) {
        if (!value.is_string()) mismatch();
        slot = value;
    } else if (slot.is_array()) {
        if (!value.is_array()) mismatch();
        ordered_json out = ordered_json::array();
        const ordered_json proto = slot.empty() ? ordered_json() : slot.front();
        for (const auto& e : value) {
            ordered_json item = proto;
            if (proto.is_null()) item = e;
            else set_value(item, e, where + "[]");
            out.push_back(item);
        }
        slot = out;
    } else {
        mismatch();
    }
}

/// Overlays a config file onto the defaults. Unknown keys are rejected.
inline void merge_config(ordered_json& base, const ordered_json& file, const std::string& prefix = "") {
    if (!file.is_object()) input_error("config: " + (prefix.empty() ? "document" : "'" + prefix + "'") + " must be an object");
    for (auto it = file.begin(); it != file.end(); ++it) {
        const std::string where = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) input_error("config: unknown key '" + where + "'");
        ordered_json& slot = base[it.key()];
        if (slot.is_object()) merge_config(slot, it.value(), where);
        else set_value(slot, it.value(), where);
    }
}

inline ordered_json read_json_file(const std::filesystem::path& path, const char* what) {
    if (!std::filesystem::exists(path)) input_error(std::string(what) + ": no such file '" + path.string() + "'");
    std::ifstream in(path);
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        input_error(std::string(what) + " '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

/// Hex SHA-256 of `text`.
inline std::string sha256_hex(std::string_view text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Failure(kComputeError, "SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

/// The configuration a command actually ran with, plus its hash.
struct EffectiveConfig {
    ordered_json json;
    std::string hash;
};

inline EffectiveConfig effective_config(const ordered_json& cfg, const std::string& command,
                                        const ordered_json& extra = ordered_json::object()) {
    EffectiveConfig e;
    e.json["command"] = command;
    e.json["seed"] = cfg.at("seed");
    e.json["format"] = cfg.at("format");
    if (cfg.contains(command)) e.json[command] = cfg.at(command);
    for (auto it = extra.begin(); it != extra.end(); ++it) e.json[it.key()] = it.value();
    e.hash = sha256_hex(dump_json(e.json));
    return e;
}

// ---------------------------------------------------------------------------
// Classifier specs

using ClassifierFactory =
    std::function<std::unique_ptr<DifferentiableClassifier>(const Grid&, std::size_t channels)>;

struct ClassifierSpec {
    ordered_json json;
    ClassifierFactory make;
};

/// Linear weights scaled so that f stays in [0,1] on the unit cube with bias 0.5.
inline GridArray<double> random_linear_weights(const Grid& g, std::size_t channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GridArray<double> w(g, channels);
    double pos = 0.0, neg = 0.0;
    for (double& x : w.values()) {
        x = unit(rng);
        (x > 0 ? pos : neg) += x;
    }
    const double scale = 0.45 / std::max({pos, -neg, 1e-300});
    for (double& x : w.values()) x *= scale;
    return w;
}

inline ClassifierSpec load_classifier(const std::filesystem::path& path) {
    const ordered_json j = read_json_file(path, "classifier spec");
    const std::filesystem::path base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path r = p;
        if (r.is_relative()) r = base / r;
        if (!std::filesystem::exists(r)) input_error("classifier spec: no such file '" + r.string() + "'");
        return r;
    };
    ClassifierSpec spec;
    spec.json = j;
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "constant") {
            detail::reject_unknown_keys(j, {"kind", "value"}, "classifier spec");
            const double value = j.at("value").get<double>();
            (void)ConstantClassifier(value);
            spec.make = [value](const Grid&, std::size_t) { return std::make_unique<ConstantClassifier>(value); };
        } else if (kind == "linear") {
            detail::reject_unknown_keys(j, {"kind", "weights", "seed", "bias"}, "classifier spec");
            const double bias = j.value("bias", 0.5);
            if (j.contains("weights")) {
                const auto file = resolve(j.at("weights").get<std::string>());
                const NpyArray w = load_input("classifier weights '" + file.string() + "'", [&] { return read_array(file); });
                spec.make = [w, bias, file](const Grid& g, std::size_t c) {
                    const std::vector<std::size_t> expect = {g.frames(), g.rows(), g.cols(), c};
                    std::vector<std::size_t> shape = w.shape;
                    if (shape.size() == 3) shape.push_back(1);
                    if (shape != expect) throw GridMismatch("classifier weights '" + file.string() + "' do not match the video shape");
                    return std::make_unique<LinearClassifier>(GridArray<double>(g, c, w.as_doubles()), bias);
                };
            } else {
                const std::uint64_t seed = j.value("seed", std::uint64_t{0});
                spec.make = [seed, bias](const Grid& g, std::size_t c) {
                    return std::make_unique<LinearClassifier>(random_linear_weights(g, c, seed), bias);
                };
            }
        } else if (kind == "masked-mean") {
            detail::reject_unknown_keys(j, {"kind", "mask", "part"}, "classifier spec");
            const auto file = resolve(j.at("mask").get<std::string>());
            std::optional<Part> part;
            if (j.contains("part")) {
                part = parse_part(j.at("part").get<std::string>());
                if (!part) input_error("classifier spec: unknown part '" + j.at("part").get<std::string>() + "'");
            }
            const BinaryMask mask = load_input("classifier mask '" + file.string() + "'", [&] {
                return part ? BinaryMask::of_part(load_part_mask(file), *part) : load_binary_mask(file);
            });
            spec.make = [mask](const Grid&, std::size_t c) { return std::make_unique<MaskedMeanClassifier>(mask, c); };
        } else if (kind == "quadratic") {
            detail::reject_unknown_keys(j, {"kind", "seed", "squash", "curvature", "slope"}, "classifier spec");
            const std::uint64_t seed = j.value("seed", std::uint64_t{0});
            const std::string squash = j.value("squash", std::string("logistic"));
            if (squash != "logistic" && squash != "affine") input_error("classifier spec: unknown squash '" + squash + "'");
            const double curvature = j.value("curvature", 1.0);
            const double slope = j.value("slope", 1.0);
            const Squash sq = squash == "affine" ? Squash::affine : Squash::logistic;
            spec.make = [=](const Grid& g, std::size_t c) {
                if (g.size() * c > kQuadraticMaxInputs) {
                    input_error("quadratic classifier supports at most " + std::to_string(kQuadraticMaxInputs) +
                                " inputs, video has " + std::to_string(g.size() * c));
                }
                return std::make_unique<QuadraticClassifier>(QuadraticClassifier::random(g, c, seed, sq, curvature, slope));
            };
        } else {
            input_error("classifier spec: unknown kind '" + kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        input_error("classifier spec '" + path.string() + "' is malformed: " + e.what());
    } catch (const FormatError& e) {
        input_error(std::string(e.what()));
    } catch (const InvalidArgument& e) {
        input_error("classifier spec: " + std::string(e.what()));
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Parallel execution

inline std::size_t resolve_jobs(std::uint64_t requested) {
    if (requested > 0) return static_cast<std::size_t>(requested);
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. Every index runs even
/// if others fail; the returned vector holds the exception of each failed index.
inline std::vector<std::exception_ptr> parallel_for(std::size_t n, std::size_t jobs,
                                                    const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(jobs, n);
    if (threads <= 1) {
        worker();
        return errors;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return errors;
}

/// Exit code for an exception escaping a computation.
inline ExitCode classify(const std::exception_ptr& e, std::string& message) {
    try {
        std::rethrow_exception(e);
    } catch (const Failure& f) {
        message = f.what();
        return f.code();
    } catch (const IoError& x) {
        message = x.what();
        return kInputError;
    } catch (const FormatError& x) {
        message = x.what();
        return kInputError;
    } catch (const GridMismatch& x) {
        message = x.what();
        return kInputError;
    } catch (const std::exception& x) {
        message = x.what();
        return kComputeError;
    }
}

/// Prints one diagnostic per failed item and returns the combined exit code
/// (input errors dominate computation errors).
inline int report_failures(const std::vector<std::exception_ptr>& errors,
                           const std::vector<std::string>& names) {
    int code = kOk;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        std::string msg;
        const ExitCode c = classify(errors[i], msg);
        std::cerr << "heatmetrics: error: " << names[i] << ": " << msg << "\n";
        code = std::max(code, static_cast<int>(c));
    }
    return code;
}

inline std::string stem_of(const std::filesystem::path& p) { return p.stem().string(); }

}  // namespace heatmetrics::cli

#pragma once

// Command-line front end. dispatch() is the whole program minus main(), so
// tests can drive it with argument vectors and string streams.
//
// Settings resolve as: command-line flag > environment (PDN_SEED,
// PDN_THREADS) > --config file (flat key=value) > built-in default.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/eval/suite.hpp"
#include "pdn/image.hpp"
#include "pdn/imageio.hpp"
#include "pdn/log.hpp"
#include "pdn/model/denoise.hpp"
#include "pdn/model/train.hpp"
#include "pdn/model/weights_io.hpp"
#include "pdn/noise_vst.hpp"
#include "pdn/patchwork.hpp"
#include "pdn/random.hpp"
#include "pdn/report.hpp"
#include "pdn/selftest.hpp"

namespace pdn::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kRuntime = 2 };

// Bad flag values, missing required settings and similar caller mistakes.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string subcommand;
  double peak = 4.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t stride = 2;
  std::size_t patch_size = 64;
  double sigma = 0.0;  // 0: patch_size / 4
  std::size_t epochs = 10;
  std::size_t batch_size = 100;
  double learning_rate = 1e-3;
  std::size_t patches_per_image = 64;
  double train_fraction = 0.8;
  double blur_sigma = 1.0;
  bool skip = true;
  std::string branches;  // empty: default two-branch layout
  std::vector<std::size_t> strides{1, 2, 4, 8, 16, 32};
  std::vector<double> peaks{1, 2, 4, 8, 16};
  std::string corpus;
  std::string weights;
  std::string weights_template;  // "{peak}" is replaced per peak
  std::string out_dir;
  std::string report;
  std::string config;
  std::vector<std::string> inputs;

  double resolved_sigma() const {
    return sigma > 0.0 ? sigma : default_sigma(patch_size);
  }
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  if constexpr (std::is_unsigned_v<T>) {
    if (!text.empty() && text.front() == '-') throw UsageError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  in >> value;
  if (in.fail() || !in.eof()) throw UsageError(key + ": cannot parse '" + text + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw UsageError(key + ": empty list");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw UsageError(key + ": expected true/false, got '" + text + "'");
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

inline std::string number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct Setting {
  const char* key;  // --key on the command line, key= in config files
  const char* help;
};

inline const std::vector<Setting>& settings() {
  static const std::vector<Setting> all{
      {"peak", "peak photon count of the clean image (default 4)"},
      {"seed", "seed for all randomness (default 0, env PDN_SEED)"},
      {"threads", "worker threads (default 1, env PDN_THREADS)"},
      {"stride", "patch stride for denoising (default 2)"},
      {"patch-size", "training patch size (default 64)"},
      {"sigma", "reconstruction weight sigma, 0 = patch size / 4"},
      {"epochs", "training epochs (default 10)"},
      {"batch-size", "training batch size (default 100)"},
      {"lr", "RMSProp learning rate (default 0.001)"},
      {"patches-per-image", "random patches per training image (default 64)"},
      {"train-fraction", "share of patches used for training (default 0.8)"},
      {"blur-sigma", "Gaussian blur of the VST baseline (default 1)"},
      {"skip", "use encoder-decoder skip connections (default true)"},
      {"branches", "layer layout, e.g. 32:5:2,16:5:2;32:5:2,16:5:2,8:5:2"},
      {"strides", "comma-separated strides for sweep-stride"},
      {"peaks", "comma-separated peaks for sweep-peak"},
      {"corpus", "directory of .pgm/.png images"},
      {"weights", "weights file to write (train) or read"},
      {"weights-template", "weights path per peak, with {peak} placeholder"},
      {"out-dir", "evaluate: also write noisy and denoised images here"},
      {"report", "CSV report path (default: stdout)"}};
  return all;
}

inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "peak") {
    cfg.peak = parse_number<double>(key, value);
    if (!(cfg.peak > 0.0)) throw UsageError("peak must be positive");
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_number<unsigned>(key, value);
    if (cfg.threads == 0) throw UsageError("threads must be >= 1");
  } else if (key == "stride") {
    cfg.stride = parse_number<std::size_t>(key, value);
    if (cfg.stride == 0) throw UsageError("stride must be >= 1");
  } else if (key == "patch-size") {
    cfg.patch_size = parse_number<std::size_t>(key, value);
  } else if (key == "sigma") {
    cfg.sigma = parse_number<double>(key, value);
    if (cfg.sigma < 0.0) throw UsageError("sigma must be >= 0");
  } else if (key == "epochs") {
    cfg.epochs = parse_number<std::size_t>(key, value);
  } else if (key == "batch-size") {
    cfg.batch_size = parse_number<std::size_t>(key, value);
    if (cfg.batch_size == 0) throw UsageError("batch-size must be >= 1");
  } else if (key == "lr") {
    cfg.learning_rate = parse_number<double>(key, value);
    if (!(cfg.learning_rate > 0.0)) throw UsageError("lr must be positive");
  } else if (key == "patches-per-image") {
    cfg.patches_per_image = parse_number<std::size_t>(key, value);
  } else if (key == "train-fraction") {
    cfg.train_fraction = parse_number<double>(key, value);
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0)) throw UsageError("train-fraction must be in (0, 1]");
  } else if (key == "blur-sigma") {
    cfg.blur_sigma = parse_number<double>(key, value);
    if (!(cfg.blur_sigma > 0.0)) throw UsageError("blur-sigma must be positive");
  } else if (key == "skip") {
    cfg.skip = parse_bool(key, value);
  } else if (key == "branches") {
    cfg.branches = value;
  } else if (key == "strides") {
    cfg.strides = parse_list<std::size_t>(key, value);
    if (std::count(cfg.strides.begin(), cfg.strides.end(), 0u)) throw UsageError("strides must be >= 1");
  } else if (key == "peaks") {
    cfg.peaks = parse_list<double>(key, value);
    for (double p : cfg.peaks) {
      if (!(p > 0.0)) throw UsageError("peaks must be positive");
    }
  } else if (key == "corpus") {
    cfg.corpus = value;
  } else if (key == "weights") {
    cfg.weights = value;
  } else if (key == "weights-template") {
    cfg.weights_template = value;
  } else if (key == "out-dir") {
    cfg.out_dir = value;
  } else if (key == "report") {
    cfg.report = value;
  } else {
    throw UsageError("unknown setting '" + key + "'");
  }
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

// Branch layouts are written "32:5:2,16:5:2;32:5:2,16:5:2,8:5:2".
inline model::NetworkConfig network_config(const RunConfig& cfg) {
  model::NetworkConfig net;
  net.patch_size = cfg.patch_size;
  net.skip = cfg.skip;
  net.seed = cfg.seed;
  if (!cfg.branches.empty()) {
    net.branches.clear();
    std::stringstream in(cfg.branches);
    std::string branch;
    while (std::getline(in, branch, ';')) {
      try {
        net.branches.push_back(model::parse_branch(branch));
      } catch (const Error& e) {
        throw UsageError(std::string("branches: ") + e.what());
      }
    }
  }
  try {
    model::validate(net);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return net;
}

inline report::Provenance provenance(const RunConfig& cfg) {
  return {{"subcommand", cfg.subcommand},
          {"peak", number(cfg.peak)},
          {"seed", std::to_string(cfg.seed)},
          {"threads", std::to_string(cfg.threads)},
          {"stride", std::to_string(cfg.stride)},
          {"patch_size", std::to_string(cfg.patch_size)},
          {"sigma", number(cfg.resolved_sigma())},
          {"epochs", std::to_string(cfg.epochs)},
          {"batch_size", std::to_string(cfg.batch_size)},
          {"learning_rate", number(cfg.learning_rate)},
          {"patches_per_image", std::to_string(cfg.patches_per_image)},
          {"train_fraction", number(cfg.train_fraction)},
          {"blur_sigma", number(cfg.blur_sigma)},
          {"skip", cfg.skip ? "true" : "false"},
          {"branches", cfg.branches.empty() ? "default" : cfg.branches},
          {"strides", join(cfg.strides)},
          {"peaks", join(cfg.peaks)},
          {"corpus", cfg.corpus},
          {"weights", cfg.weights},
          {"weights_template", cfg.weights_template},
          {"out_dir", cfg.out_dir},
          {"report", cfg.report},
          {"config", cfg.config}};
}

inline void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError("--" + flag + " is required");
}

struct Corpus {
  std::vector<std::string> ids;
  std::vector<Image> images;
};

inline bool is_image_file(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".png";
}

// Every .pgm/.png file of a directory, in file-name order.
inline Corpus load_corpus(const std::string& dir) {
  require(dir, "corpus");
  if (!std::filesystem::is_directory(dir)) throw UsageError("corpus is not a directory: " + dir);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Corpus c;
  for (const auto& f : files) {
    c.ids.push_back(f.stem().string());
    c.images.push_back(io::load_grayscale(f));
  }
  return c;
}

inline void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.report.empty()) {
    out << text;
  } else {
    report::write_text(cfg.report, text);
  }
}

// Noisy images are stored as raw photon counts: gray level k means k counts.
inline void save_counts(const Image& noisy, const std::filesystem::path& path) {
  Image counts = noisy;
  counts.set_peak(255.0);
  if (counts.max_value() > 255.0) warn("photon counts above 255 are clipped in " + path.string());
  io::save_grayscale(counts, path);
}

inline Image load_counts(const std::filesystem::path& path, double peak) {
  Image img = io::load_grayscale(path);
  img.set_peak(peak);
  return img;
}

struct Trial {
  std::vector<Image> clean;
  std::vector<Image> noisy;
};

// Image i of the corpus is scaled to `peak` and corrupted with noise seed
// derive_seed(seed, i).
inline Trial make_trial(const Corpus& corpus, double peak, std::uint64_t seed, unsigned threads) {
  Trial t;
  for (std::size_t i = 0; i < corpus.images.size(); ++i) {
    t.clean.push_back(scale_to_peak(corpus.images[i], peak));
    t.noisy.push_back(corrupt_image(t.clean.back(), NoiseSeed{derive_seed(seed, i)}, threads));
  }
  return t;
}

inline eval::NamedDenoiser blur_baseline(double blur_sigma) {
  return {"vst_blur", [blur_sigma](const Image& img) {
            return vst_denoise_pipeline(img, [blur_sigma](const Image& y) { return gaussian_blur(y, blur_sigma); });
          }};
}

inline eval::NamedDenoiser network_candidate(const model::Network<float>& net, const RunConfig& cfg,
                                             std::size_t stride, double* seconds = nullptr) {
  return {"network", [&net, &cfg, stride, seconds](const Image& img) {
            const auto t0 = std::chrono::steady_clock::now();
            Image out = model::denoise_image(net, img, stride, cfg.resolved_sigma(), cfg.threads);
            if (seconds) *seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return out;
          }};
}

inline model::Network<float> load_network(const std::string& path, RunConfig& cfg) {
  model::Network<float> net = model::load_weights(path);
  // Reconstruction geometry follows the weights, not the flag.
  cfg.patch_size = net.config().patch_size;
  return net;
}

inline int run_corrupt(RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.size() != 2) throw UsageError("corrupt needs <input> <output>");
  const Image clean = scale_to_peak(io::load_grayscale(cfg.inputs[0]), cfg.peak);
  save_counts(corrupt_image(clean, NoiseSeed{cfg.seed}, cfg.threads), cfg.inputs[1]);
  out << "wrote " << cfg.inputs[1] << "\n";
  return kSuccess;
}

inline int run_train(RunConfig& cfg, std::ostream& out) {
  require(cfg.weights, "weights");
  model::Network<float> net(network_config(cfg));
  const Corpus corpus = load_corpus(cfg.corpus);
  if (corpus.images.empty()) throw UsageError("corpus " + cfg.corpus + " holds no .pgm/.png images");
  std::vector<SourceImage> sources;
  for (std::size_t i = 0; i < corpus.images.size(); ++i) sources.push_back({corpus.ids[i], corpus.images[i]});
  DatasetOptions dopt;
  dopt.patch_size = cfg.patch_size;
  dopt.patches_per_image = cfg.patches_per_image;
  dopt.peak = cfg.peak;
  dopt.seed = cfg.seed;
  dopt.train_fraction = cfg.train_fraction;
  const PatchDataset ds = build_dataset(sources, dopt);
  model::TrainOptions topt;
  topt.epochs = cfg.epochs;
  topt.batch_size = cfg.batch_size;
  topt.rmsprop.learning_rate = cfg.learning_rate;
  topt.seed = cfg.seed;
  topt.threads = cfg.threads;
  const model::TrainReport rep = model::train(net, ds, topt);
  model::save_weights(net, cfg.weights);
  emit(cfg, report::train_csv(rep, provenance(cfg)), out);
  return kSuccess;
}

inline int run_denoise(RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.size() != 2) throw UsageError("denoise needs <input> <output>");
  require(cfg.weights, "weights");
  const model::Network<float> net = load_network(cfg.weights, cfg);
  const Image noisy = load_counts(cfg.inputs[0], cfg.peak);
  io::save_grayscale(model::denoise_image(net, noisy, cfg.stride, cfg.resolved_sigma(), cfg.threads), cfg.inputs[1]);
  out << "wrote " << cfg.inputs[1] << "\n";
  return kSuccess;
}

inline Corpus load_evaluation_set(const RunConfig& cfg) {
  Corpus corpus = load_corpus(cfg.corpus);
  if (corpus.images.empty()) throw UsageError("evaluation set " + cfg.corpus + " is empty");
  return corpus;
}

inline int run_evaluate(RunConfig& cfg, std::ostream& out) {
  require(cfg.weights, "weights");
  const Corpus corpus = load_evaluation_set(cfg);
  const model::Network<float> net = load_network(cfg.weights, cfg);
  const Trial trial = make_trial(corpus, cfg.peak, cfg.seed, cfg.threads);
  const auto rep = eval::evaluate_suite(trial.clean, trial.noisy, corpus.ids,
                                        {blur_baseline(cfg.blur_sigma), network_candidate(net, cfg, cfg.stride)},
                                        cfg.stride, cfg.peak);
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    for (std::size_t i = 0; i < corpus.ids.size(); ++i) {
      const std::filesystem::path dir(cfg.out_dir);
      save_counts(trial.noisy[i], dir / (corpus.ids[i] + "_noisy.pgm"));
      io::save_grayscale(model::denoise_image(net, trial.noisy[i], cfg.stride, cfg.resolved_sigma(), cfg.threads),
                         dir / (corpus.ids[i] + "_denoised.pgm"));
    }
  }
  emit(cfg, report::eval_csv(rep, provenance(cfg)), out);
  return kSuccess;
}

inline int run_sweep_stride(RunConfig& cfg, std::ostream& out) {
  require(cfg.weights, "weights");
  const Corpus corpus = load_evaluation_set(cfg);
  const model::Network<float> net = load_network(cfg.weights, cfg);
  const Trial trial = make_trial(corpus, cfg.peak, cfg.seed, cfg.threads);
  std::vector<report::StrideRow> rows;
  for (std::size_t stride : cfg.strides) {
    double seconds = 0.0;
    const auto rep = eval::evaluate_suite(trial.clean, trial.noisy, corpus.ids,
                                          {blur_baseline(cfg.blur_sigma), network_candidate(net, cfg, stride, &seconds)},
                                          stride, cfg.peak);
    const Image& first = trial.clean.front();
    rows.push_back({stride, seconds / static_cast<double>(corpus.images.size()), rep.mean_psnr_db[1], rep.mean_gain_db,
                    rep.t_stat, rep.p_value,
                    grid_patch_count(first.height(), first.width(), cfg.patch_size, stride)});
  }
  emit(cfg, report::stride_csv(rows, provenance(cfg)), out);
  return kSuccess;
}

inline std::string weights_for_peak(const std::string& pattern, double peak) {
  const std::string token = "{peak}";
  const auto pos = pattern.find(token);
  if (pos == std::string::npos) throw UsageError("weights-template must contain {peak}");
  std::ostringstream p;
  p << peak;
  return pattern.substr(0, pos) + p.str() + pattern.substr(pos + token.size());
}

inline int run_sweep_peak(RunConfig& cfg, std::ostream& out) {
  require(cfg.weights_template, "weights-template");
  const Corpus corpus = load_evaluation_set(cfg);
  std::vector<report::PeakRow> rows;
  for (double peak : cfg.peaks) {
    const model::Network<float> net = load_network(weights_for_peak(cfg.weights_template, peak), cfg);
    const Trial trial = make_trial(corpus, peak, cfg.seed, cfg.threads);
    const auto rep = eval::evaluate_suite(trial.clean, trial.noisy, corpus.ids,
                                          {blur_baseline(cfg.blur_sigma), network_candidate(net, cfg, cfg.stride)},
                                          cfg.stride, peak);
    rows.push_back({peak, rep.mean_psnr_db[0], rep.mean_psnr_db[1], rep.mean_gain_db, rep.win_rate, rep.t_stat,
                    rep.p_value});
  }
  emit(cfg, report::peak_csv(rows, provenance(cfg)), out);
  return kSuccess;
}

inline int run_selftest(RunConfig& cfg, std::ostream& out) {
  bool ok = true;
  for (const auto& r : selftest::run_all(cfg.seed == 0 ? 1 : cfg.seed)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kSuccess : kRuntime;
}

}  // namespace detail

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on usage errors and 2 on runtime failures; diagnostics go to
/// `err`.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                    const EnvLookup& env = process_env) {
  CLI::App app{"Poisson image denoising experiments", "pdn"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::vector<CLI::Option*> options;
  for (const auto& [key, help] : detail::settings()) {
    options.push_back(app.add_option(std::string("--") + key, flags[key], help)->type_name("")->expected(1));
  }
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value settings file (keys as above)")->type_name("");

  RunConfig cfg;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"corrupt", "scale an image to --peak and add Poisson noise: <input> <output>"},
      {"train", "build a patch dataset from --corpus, train, write --weights"},
      {"denoise", "denoise a photon-count image with --weights: <input> <output>"},
      {"evaluate", "compare the network with the VST+blur baseline on --corpus"},
      {"sweep-stride", "evaluate at every stride in --strides"},
      {"sweep-peak", "evaluate every peak in --peaks with --weights-template"},
      {"selftest", "gradient, adjoint, transform and statistics checks"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    if (name == "corrupt" || name == "denoise") sub->add_option("files", cfg.inputs, "<input> <output>");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "pdn: " << e.what() << "\n" << app.help();
    return kUsage;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    cfg.config = config_path;
    if (!config_path.empty()) detail::apply_config_file(cfg, config_path);
    for (const char* key : {"seed", "threads"}) {
      std::string name = std::string("PDN_") + key;
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
      if (const auto value = env(name)) detail::apply_setting(cfg, key, *value);
    }
    const auto& all = detail::settings();
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (options[i]->count() > 0) detail::apply_setting(cfg, all[i].key, flags[all[i].key]);
    }
  } catch (const UsageError& e) {
    err << "pdn: " << e.what() << "\n";
    return kUsage;
  }

  using Runner = int (*)(RunConfig&, std::ostream&);
  const std::map<std::string, Runner> runners{
      {"corrupt", detail::run_corrupt},   {"train", detail::run_train},
      {"denoise", detail::run_denoise},   {"evaluate", detail::run_evaluate},
      {"sweep-stride", detail::run_sweep_stride}, {"sweep-peak", detail::run_sweep_peak},
      {"selftest", detail::run_selftest}};
  try {
    return runners.at(cfg.subcommand)(cfg, out);
  } catch (const UsageError& e) {
    err << "pdn " << cfg.subcommand << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "pdn " << cfg.subcommand << ": " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace pdn::cli

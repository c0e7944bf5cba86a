#include "pnn/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pnn/core/error.hpp"

namespace pnn::harness {

namespace {

[[noreturn]] void fail(const std::string& source, const YAML::Mark& mark, const std::string& field,
                       const std::string& what) {
  std::ostringstream msg;
  msg << source;
  if (!mark.is_null()) msg << ":" << mark.line + 1;
  msg << ": " << field << ": " << what;
  throw ConfigError(msg.str(), field);
}

// A mapping whose keys must all be consumed before finish().
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(source_, node_.Mark(), name(), "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T required(const std::string& key) {
    if (!has(key)) fail(source_, node_ ? node_.Mark() : YAML::Mark::null_mark(), field(key), "required");
    return convert<T>(key);
  }

  // A scalar is repeated n times; a list must have exactly n entries.
  template <typename T>
  std::vector<T> per_layer(const std::string& key, int n, std::vector<T> fallback, bool require) {
    if (!has(key)) {
      if (require) fail(source_, node_ ? node_.Mark() : YAML::Mark::null_mark(), field(key), "required");
      if (fallback.size() == 1) return std::vector<T>(static_cast<std::size_t>(std::max(n, 0)), fallback[0]);
      return fallback;
    }
    const YAML::Node v = node_[key];
    used_.insert(key);
    if (v.IsScalar()) return std::vector<T>(static_cast<std::size_t>(std::max(n, 0)), scalar<T>(v, field(key)));
    std::vector<T> out = list<T>(v, field(key));
    if (static_cast<int>(out.size()) != n) {
      fail(source_, v.Mark(), field(key),
           "expected one value per layer (" + std::to_string(n) + "), got " + std::to_string(out.size()));
    }
    return out;
  }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(has(key) ? node_[key] : YAML::Node(), field(key), source_);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key)) fail(source_, kv.first.Mark(), field(key), "unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string name() const { return path_.empty() ? "<root>" : path_; }
  YAML::Mark mark(const std::string& key) const { return has(key) ? node_[key].Mark() : YAML::Mark::null_mark(); }
  const std::string& source() const { return source_; }

  template <typename T>
  T scalar(const YAML::Node& v, const std::string& f) const {
    if (!v.IsScalar()) fail(source_, v.Mark(), f, "expected a scalar");
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(source_, v.Mark(), f, "cannot read '" + v.Scalar() + "' as " + type_name<T>());
    }
  }

  template <typename T>
  std::vector<T> list(const YAML::Node& v, const std::string& f) const {
    if (!v.IsSequence()) fail(source_, v.Mark(), f, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(scalar<T>(v[i], f + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    if constexpr (std::is_same_v<T, std::string>) return "a string";
    if constexpr (std::is_floating_point_v<T>) return "a number";
    return "an integer";
  }

  template <typename T>
  T convert(const std::string& key) {
    used_.insert(key);
    const YAML::Node v = node_[key];
    if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>> ||
                  std::is_same_v<T, std::vector<std::string>> || std::is_same_v<T, std::vector<std::uint64_t>>) {
      return list<typename T::value_type>(v, field(key));
    } else {
      return scalar<T>(v, field(key));
    }
  }

  YAML::Node node_;
  std::string path_;
  std::string source_;
  std::set<std::string> used_;
};

void check(bool ok, const Section& s, const std::string& key, const std::string& what) {
  if (!ok) fail(s.source(), s.mark(key), s.field(key), what);
}

Task parse_task(const std::string& v, const Section& s) {
  if (v == "mnist") return Task::Mnist;
  if (v == "vowel") return Task::Vowel;
  fail(s.source(), s.mark("task"), "task", "expected mnist or vowel, got '" + v + "'");
}

Method parse_method(const std::string& v, const Section& s) {
  if (v == "mfff") return Method::Mfff;
  if (v == "ideal-bp") return Method::IdealBp;
  if (v == "in-silico") return Method::InSilico;
  if (v == "pa-bp") return Method::PaBp;
  if (v == "perturb-recover") return Method::PerturbRecover;
  fail(s.source(), s.mark("method"), "method",
       "expected one of mfff, ideal-bp, in-silico, pa-bp, perturb-recover; got '" + v + "'");
}

SurrogateConfig parse_surrogate(Section s, SurrogateConfig d) {
  d.hidden = s.get("hidden", d.hidden);
  d.epochs = s.get("epochs", d.epochs);
  d.lr = s.get("lr", d.lr);
  d.batch_size = s.get("batch_size", d.batch_size);
  d.val_frac = s.get("val_frac", d.val_frac);
  d.layer_norm = s.get("layer_norm", d.layer_norm);
  d.dropout = s.get("dropout", d.dropout);
  d.n_pairs = s.get("n_pairs", d.n_pairs);
  d.layer = s.get("layer", d.layer);
  check(d.epochs >= 0, s, "epochs", "must be non-negative");
  check(d.lr >= 0.0, s, "lr", "must be non-negative");
  check(d.batch_size >= 1, s, "batch_size", "must be positive");
  check(d.val_frac > 0.0 && d.val_frac < 1.0, s, "val_frac", "must lie in (0, 1)");
  check(d.dropout >= 0.0 && d.dropout < 1.0, s, "dropout", "must lie in [0, 1)");
  check(d.n_pairs >= 10, s, "n_pairs", "needs at least 10 pairs");
  for (int h : d.hidden) check(h >= 1, s, "hidden", "widths must be positive");
  s.finish();
  return d;
}

}  // namespace

std::string to_string(Task t) { return t == Task::Mnist ? "mnist" : "vowel"; }

std::string to_string(Method m) {
  switch (m) {
    case Method::Mfff: return "mfff";
    case Method::IdealBp: return "ideal-bp";
    case Method::InSilico: return "in-silico";
    case Method::PaBp: return "pa-bp";
    case Method::PerturbRecover: return "perturb-recover";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(source, e.mark, "<syntax>", e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");
  Section s(root, "", source);
  ExperimentConfig cfg;

  cfg.task = parse_task(s.required<std::string>("task"), s);
  cfg.method = parse_method(s.required<std::string>("method"), s);
  cfg.seed = s.get<std::uint64_t>("seed", cfg.seed);
  cfg.depth = s.required<int>("depth");
  check(cfg.depth >= 1, s, "depth", "must be at least 1, got " + std::to_string(cfg.depth));
  cfg.skip = s.get("skip", cfg.skip);
  cfg.widths = s.per_layer<int>("width", cfg.depth, {0}, false);
  for (int w : cfg.widths) check(w >= 0, s, "width", "must be non-negative");
  cfg.out = s.get("out", cfg.out);

  {
    Section d = s.child("data");
    cfg.data.dir = d.get("dir", cfg.data.dir);
    cfg.data.crop = d.get("crop", cfg.data.crop);
    cfg.data.pool = d.get("pool", cfg.data.pool);
    cfg.data.n_train = d.get("n_train", cfg.data.n_train);
    cfg.data.n_test = d.get("n_test", cfg.data.n_test);
    check(cfg.data.crop >= 0 && cfg.data.crop < 14, d, "crop", "must lie in [0, 14)");
    check(cfg.data.pool >= 1, d, "pool", "must be positive");
    check(cfg.data.n_train >= 1, d, "n_train", "must be positive");
    check(cfg.data.n_test >= 1, d, "n_test", "must be positive");
    d.finish();
  }
  {
    Section v = s.child("vowel");
    cfg.vowel.n_classes = v.get("n_classes", cfg.vowel.n_classes);
    cfg.vowel.dim = v.get("dim", cfg.vowel.dim);
    cfg.vowel.n_train = v.get("n_train", cfg.vowel.n_train);
    cfg.vowel.n_test = v.get("n_test", cfg.vowel.n_test);
    cfg.vowel.noise_sigma = v.get("noise_sigma", cfg.vowel.noise_sigma);
    cfg.vowel.seed = v.get("seed", cfg.vowel.seed);
    check(cfg.vowel.n_classes >= 2, v, "n_classes", "needs at least 2 classes");
    check(cfg.vowel.dim >= 1, v, "dim", "must be positive");
    check(cfg.vowel.n_train >= 1 && cfg.vowel.n_test >= 1, v, "n_train", "sample counts must be positive");
    check(cfg.vowel.noise_sigma >= 0.0, v, "noise_sigma", "must be non-negative");
    v.finish();
  }
  {
    Section e = s.child("embed");
    const std::string mode = e.get<std::string>("mode", "overwrite");
    check(mode == "overwrite" || mode == "append", e, "mode", "expected overwrite or append");
    cfg.embed.mode = mode == "append" ? EmbedMode::Append : EmbedMode::Overwrite;
    cfg.embed.slot_offset = e.get("offset", 0);
    cfg.embed.slot_value = e.get("value", 1.0);
    check(cfg.embed.slot_offset >= 0, e, "offset", "must be non-negative");
    e.finish();
  }
  cfg.embed.n_classes = cfg.task == Task::Mnist ? 10 : cfg.vowel.n_classes;

  {
    Section b = s.child("backend");
    BackendConfig& be = cfg.backend;
    be.kind = b.required<std::string>("kind");
    be.seed = b.get<std::uint64_t>("seed", be.seed);
    const bool optics = be.kind == "optics", acoustic = be.kind == "acoustic", microwave = be.kind == "microwave",
               remote = be.kind == "remote";
    check(optics || acoustic || microwave || remote, b, "kind",
          "expected optics, acoustic, microwave or remote, got '" + be.kind + "'");
    // physics parameters have no silent defaults
    if (optics) be.phase_gain = b.per_layer<double>("phase_gain", cfg.depth, {}, true);
    if (acoustic) {
      be.weight_scale = b.required<double>("weight_scale");
      check(be.weight_scale > 0.0, b, "weight_scale", "must be positive");
      be.channels = b.get("channels", be.channels);
      be.output_dim = b.get("output_dim", be.output_dim);
      be.gains = b.get("gains", be.gains);
      be.exponents = b.get("exponents", be.exponents);
      check(be.channels >= 1 && be.output_dim >= 1, b, "channels", "dimensions must be positive");
      check(be.gains.size() == be.exponents.size(), b, "gains", "gains and exponents need the same length");
    }
    if (microwave) {
      be.eta = b.required<double>("eta");
      check(be.eta >= 0.0, b, "eta", "must be non-negative");
      be.elements = b.get("elements", be.elements);
      be.frequencies = b.get("frequencies", be.frequencies);
      be.phase_on = b.get("phase_on", be.phase_on);
      const std::string enc = b.get<std::string>("encoding", "binary");
      check(enc == "binary" || enc == "continuous", b, "encoding", "expected binary or continuous");
      be.encoding = enc == "binary" ? physical::PixelEncoding::Binary : physical::PixelEncoding::ContinuousPhase;
      check(be.frequencies >= 1, b, "frequencies", "must be positive");
    }
    if (remote) {
      be.endpoints = b.per_layer<std::string>("endpoints", cfg.depth, {}, true);
      be.timeout_ms = b.get("timeout_ms", be.timeout_ms);
      check(be.timeout_ms >= 1, b, "timeout_ms", "must be positive");
    }
    b.finish();
  }
  {
    Section t = s.child("training");
    TrainingConfig& tr = cfg.training;
    tr.theta = t.per_layer<double>("theta", cfg.depth, {1.0}, false);
    tr.lr = t.get("lr", tr.lr);
    tr.epochs = t.get("epochs", tr.epochs);
    tr.n_inter = t.get("n_inter", tr.n_inter);
    tr.batch_size = t.get("batch_size", tr.batch_size);
    tr.eval_every = t.get("eval_every", tr.eval_every);
    tr.train_eval_samples = t.get("train_eval_samples", tr.train_eval_samples);
    tr.include_layers = t.get("include_layers", tr.include_layers);
    for (double th : tr.theta) check(th > 0.0, t, "theta", "must be positive");
    check(tr.lr >= 0.0, t, "lr", "must be non-negative");
    check(tr.epochs >= 0, t, "epochs", "must be non-negative");
    check(tr.n_inter >= 1, t, "n_inter", "must be positive");
    check(tr.batch_size >= 0, t, "batch_size", "must be non-negative");
    check(tr.eval_every >= 0, t, "eval_every", "must be non-negative");
    check(tr.train_eval_samples >= 0, t, "train_eval_samples", "must be non-negative");
    for (int l : tr.include_layers) check(l >= 0 && l < cfg.depth, t, "include_layers", "layer index out of range");
    t.finish();
  }
  cfg.bp.epochs = cfg.training.epochs;
  {
    Section b = s.child("bp");
    BpSection& bp = cfg.bp;
    bp.epochs = b.get("epochs", bp.epochs);
    bp.lr = b.get("lr", bp.lr);
    bp.batch_size = b.get("batch_size", bp.batch_size);
    bp.allow_relaxed_gradients = b.get("allow_relaxed_gradients", bp.allow_relaxed_gradients);
    bp.mismatch_sigma = b.get("mismatch_sigma", bp.mismatch_sigma);
    bp.twin_seed = b.get("twin_seed", bp.twin_seed);
    bp.backward = b.get("backward", bp.backward);
    bp.clone_sigma = b.get("clone_sigma", bp.clone_sigma);
    check(bp.epochs >= 0, b, "epochs", "must be non-negative");
    check(bp.lr >= 0.0, b, "lr", "must be non-negative");
    check(bp.batch_size >= 1, b, "batch_size", "must be positive");
    check(bp.mismatch_sigma >= 0.0, b, "mismatch_sigma", "must be non-negative");
    check(bp.clone_sigma >= 0.0, b, "clone_sigma", "must be non-negative");
    check(bp.backward == "surrogate" || bp.backward == "clone" || bp.backward == "exact", b, "backward",
          "expected surrogate, clone or exact");
    bp.surrogate = parse_surrogate(b.child("surrogate"), bp.surrogate);
    b.finish();
  }
  cfg.surrogate = parse_surrogate(s.child("surrogate"), cfg.surrogate);
  check(cfg.surrogate.layer >= 0 && cfg.surrogate.layer < cfg.depth, s, "surrogate", "surrogate.layer out of range");
  {
    Section p = s.child("perturbation");
    PerturbationConfig& pc = cfg.perturbation;
    pc.mu = p.get("mu", pc.mu);
    pc.sigmas = p.get("sigmas", pc.sigmas);
    pc.epochs_pre = p.get("epochs_pre", pc.epochs_pre);
    pc.epochs_post = p.get("epochs_post", pc.epochs_post);
    pc.seeds = p.get("seeds", pc.seeds);
    pc.clone_sigma = p.get("clone_sigma", pc.clone_sigma);
    check(!pc.sigmas.empty(), p, "sigmas", "needs at least one value");
    for (double v : pc.sigmas) check(v >= 0.0, p, "sigmas", "must be non-negative");
    check(pc.epochs_pre >= 1 && pc.epochs_post >= 1, p, "epochs_pre", "epoch counts must be positive");
    check(!pc.seeds.empty(), p, "seeds", "needs at least one seed");
    check(pc.clone_sigma >= 0.0, p, "clone_sigma", "must be non-negative");
    p.finish();
  }
  {
    Section d = s.child("diagnose");
    cfg.diagnose.ensemble = d.get("ensemble", cfg.diagnose.ensemble);
    cfg.diagnose.n_train = d.get("n_train", cfg.diagnose.n_train);
    cfg.diagnose.n_test = d.get("n_test", cfg.diagnose.n_test);
    check(cfg.diagnose.ensemble >= 2, d, "ensemble", "needs at least 2 configurations");
    check(cfg.diagnose.n_train >= 2 && cfg.diagnose.n_test >= 1, d, "n_train", "sample counts too small");
    d.finish();
  }
  s.finish();
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), "config");
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = parse_config(buf.str(), path.string());
  cfg.base_dir = path.parent_path();
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.depth < 1) throw ConfigError("depth: must be at least 1, got " + std::to_string(cfg.depth), "depth");
  if (static_cast<int>(cfg.widths.size()) != cfg.depth) throw ConfigError("width: one entry per layer", "width");
  if (cfg.method == Method::PerturbRecover && cfg.depth < 2) {
    throw ConfigError("depth: perturb-recover needs depth >= 2", "depth");
  }
  if (cfg.method == Method::PerturbRecover && cfg.backend.kind == "remote") {
    throw ConfigError("backend.kind: perturb-recover needs simulated systems", "backend.kind");
  }
  const bool bp_family =
      cfg.method == Method::IdealBp || cfg.method == Method::InSilico || cfg.method == Method::PerturbRecover;
  if (bp_family && cfg.backend.kind == "microwave" && !cfg.bp.allow_relaxed_gradients) {
    throw ConfigError("bp.allow_relaxed_gradients: microwave layers only support BP through the relaxation",
                      "bp.allow_relaxed_gradients");
  }
  if (cfg.embed.mode == EmbedMode::Overwrite) {
    const int dim = cfg.task == Task::Vowel ? cfg.vowel.dim : -1;
    if (dim >= 0 && cfg.embed.slot_offset + cfg.embed.n_classes > dim) {
      throw ConfigError("embed: label slots do not fit inside the input", "embed.offset");
    }
  }
}

namespace {

std::string encoding_name(physical::PixelEncoding e) {
  return e == physical::PixelEncoding::Binary ? "binary" : "continuous";
}

nlohmann::json surrogate_json(const SurrogateConfig& s) {
  return {{"hidden", s.hidden},         {"epochs", s.epochs},   {"lr", s.lr},
          {"batch_size", s.batch_size}, {"val_frac", s.val_frac}, {"layer_norm", s.layer_norm},
          {"dropout", s.dropout},       {"n_pairs", s.n_pairs}, {"layer", s.layer}};
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["task"] = to_string(cfg.task);
  j["method"] = to_string(cfg.method);
  j["seed"] = cfg.seed;
  j["depth"] = cfg.depth;
  j["skip"] = cfg.skip;
  j["width"] = cfg.widths;
  if (cfg.task == Task::Mnist) {
    j["data"] = {{"dir", cfg.data.dir},   {"crop", cfg.data.crop},       {"pool", cfg.data.pool},
                 {"n_train", cfg.data.n_train}, {"n_test", cfg.data.n_test}};
  } else {
    j["vowel"] = {{"n_classes", cfg.vowel.n_classes}, {"dim", cfg.vowel.dim},
                  {"n_train", cfg.vowel.n_train},     {"n_test", cfg.vowel.n_test},
                  {"noise_sigma", cfg.vowel.noise_sigma}, {"seed", cfg.vowel.seed}};
  }
  j["embed"] = {{"mode", cfg.embed.mode == EmbedMode::Append ? "append" : "overwrite"},
                {"offset", cfg.embed.slot_offset},
                {"value", cfg.embed.slot_value},
                {"n_classes", cfg.embed.n_classes}};
  const BackendConfig& b = cfg.backend;
  nlohmann::json be = {{"kind", b.kind}, {"seed", b.seed}};
  if (b.kind == "optics") be["phase_gain"] = b.phase_gain;
  if (b.kind == "acoustic") {
    be["weight_scale"] = b.weight_scale;
    be["channels"] = b.channels;
    be["output_dim"] = b.output_dim;
    be["gains"] = b.gains;
    be["exponents"] = b.exponents;
  }
  if (b.kind == "microwave") {
    be["eta"] = b.eta;
    be["elements"] = b.elements;
    be["frequencies"] = b.frequencies;
    be["phase_on"] = b.phase_on;
    be["encoding"] = encoding_name(b.encoding);
  }
  if (b.kind == "remote") {
    be["endpoints"] = b.endpoints;
    be["timeout_ms"] = b.timeout_ms;
  }
  j["backend"] = be;
  const TrainingConfig& t = cfg.training;
  j["training"] = {{"theta", t.theta},         {"lr", t.lr},
                   {"epochs", t.epochs},       {"n_inter", t.n_inter},
                   {"batch_size", t.batch_size}, {"eval_every", t.eval_every},
                   {"train_eval_samples", t.train_eval_samples}, {"include_layers", t.include_layers}};
  const BpSection& bp = cfg.bp;
  j["bp"] = {{"epochs", bp.epochs},
             {"lr", bp.lr},
             {"batch_size", bp.batch_size},
             {"allow_relaxed_gradients", bp.allow_relaxed_gradients},
             {"mismatch_sigma", bp.mismatch_sigma},
             {"twin_seed", bp.twin_seed},
             {"backward", bp.backward},
             {"clone_sigma", bp.clone_sigma},
             {"surrogate", surrogate_json(bp.surrogate)}};
  j["surrogate"] = surrogate_json(cfg.surrogate);
  const PerturbationConfig& p = cfg.perturbation;
  j["perturbation"] = {{"mu", p.mu},           {"sigmas", p.sigmas},         {"epochs_pre", p.epochs_pre},
                       {"epochs_post", p.epochs_post}, {"seeds", p.seeds}, {"clone_sigma", p.clone_sigma}};
  j["diagnose"] = {{"ensemble", cfg.diagnose.ensemble},
                   {"n_train", cfg.diagnose.n_train},
                   {"n_test", cfg.diagnose.n_test}};
  return j;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_to_json(cfg).dump())));
  return buf;
}

}  // namespace pnn::harness

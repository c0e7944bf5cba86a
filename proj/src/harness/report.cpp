#include "pnn/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pnn/core/error.hpp"

namespace pnn::harness {

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json confusion_json(const ConfusionMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json trace_json(const baselines::ArmTrace& t) {
  nlohmann::json j;
  j["arm"] = t.arm;
  j["sigma"] = t.sigma;
  j["seed"] = t.seed;
  j["pre_accuracy"] = t.pre_accuracy;
  j["pre_level"] = t.pre_level;
  j["perturbed_accuracy"] = t.perturbed_accuracy;
  j["post_accuracy"] = t.post_accuracy;
  j["recovery_epoch"] = t.recovery_epoch < 0 ? nlohmann::json(nullptr) : nlohmann::json(t.recovery_epoch);
  j["final_accuracy"] = t.final_accuracy;
  return j;
}

}  // namespace

nlohmann::json report_to_json(const RunReport& report, const ReportContext& ctx) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["method"] = report.method;
  j["status"] = report.status;
  j["message"] = report.message;
  j["seed"] = ctx.seed;
  j["config_hash"] = ctx.config_hash;
  j["config"] = ctx.config;

  nlohmann::json epochs = nlohmann::json::array();
  nlohmann::json seconds = nlohmann::json::array();
  double total = 0.0;
  for (const EpochRecord& e : report.epochs) {
    nlohmann::json extra = nlohmann::json::object();
    for (const auto& [k, v] : e.extra) extra[k] = num(v);
    epochs.push_back({{"epoch", e.epoch},
                      {"train_accuracy", num(e.train_accuracy)},
                      {"test_accuracy", num(e.test_accuracy)},
                      {"train_loss", num(e.train_loss)},
                      {"extra", extra}});
    seconds.push_back(e.seconds);
    total += e.seconds;
  }
  j["epochs"] = epochs;

  nlohmann::json trace = nlohmann::json::array();
  for (const LossTraceEntry& t : report.loss_trace) trace.push_back({t.epoch, t.layer, t.step, num(t.loss)});
  j["loss_trace"] = trace;

  nlohmann::json confusion = nlohmann::json::object();
  for (const auto& [split, m] : report.confusion) confusion[split] = confusion_json(m);
  j["confusion"] = confusion;

  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [k, v] : report.summary) summary[k] = num(v);
  j["summary"] = summary;
  j["diagnostics"] = ctx.diagnostics;
  if (ctx.traces != nullptr) {
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& t : *ctx.traces) traces.push_back(trace_json(t));
    j["traces"] = traces;
  }
  j["timing"] = {{"epoch_seconds", seconds}, {"total_epoch_seconds", total}};
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string curves_csv(const RunReport& report) {
  std::string out = "epoch,split,accuracy,loss\n";
  for (const EpochRecord& e : report.epochs) {
    const std::string ep = std::to_string(e.epoch);
    out += ep + ",train," + fmt(e.train_accuracy) + "," + fmt(e.train_loss) + "\n";
    out += ep + ",test," + fmt(e.test_accuracy) + ",\n";
    for (const auto& [k, v] : e.extra) {
      std::string split = k;
      const std::string suffix = "_accuracy";
      if (split.size() > suffix.size() && split.compare(split.size() - suffix.size(), suffix.size(), suffix) == 0) {
        split.erase(split.size() - suffix.size());
      }
      out += ep + "," + split + "," + fmt(v) + ",\n";
    }
  }
  return out;
}

std::string confusion_csv(const RunReport& report) {
  std::string out = "split,true,pred,count\n";
  for (const auto& [split, m] : report.confusion) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        out += split + "," + std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(m(i, k)) + "\n";
      }
    }
  }
  return out;
}

std::string perturb_curves_csv(const std::vector<baselines::ArmTrace>& traces) {
  std::string out = "epoch,split,accuracy,loss\n";
  for (const auto& t : traces) {
    char label[96];
    std::snprintf(label, sizeof label, "%s/sigma=%g/seed=%llu", t.arm.c_str(), t.sigma,
                  static_cast<unsigned long long>(t.seed));
    const auto pre = t.pre_accuracy.size();
    for (std::size_t e = 0; e < pre; ++e) out += std::to_string(e + 1) + "," + label + "," + fmt(t.pre_accuracy[e]) + ",\n";
    out += std::to_string(pre) + ".5," + label + "," + fmt(t.perturbed_accuracy) + ",\n";
    for (std::size_t e = 0; e < t.post_accuracy.size(); ++e) {
      out += std::to_string(pre + e + 1) + "," + label + "," + fmt(t.post_accuracy[e]) + ",\n";
    }
  }
  return out;
}

}  // namespace pnn::harness

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnn/baselines/perturb_recover.hpp"
#include "pnn/core/report.hpp"

namespace pnn::harness {

inline constexpr const char* kReportSchema = "pnn-run-report/1";

struct ReportContext {
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;
  std::uint64_t seed = 0;
  nlohmann::json diagnostics = nlohmann::json::object();
  const std::vector<baselines::ArmTrace>* traces = nullptr;
};

// Everything except "timing" is a deterministic function of config and seed.
// Accuracies that were not evaluated serialise as null.
nlohmann::json report_to_json(const RunReport& report, const ReportContext& ctx);

// Writes through a temporary file and a rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// epoch,split,accuracy,loss. Splits are train/test plus any per-epoch
// extras with their "_accuracy" suffix dropped (twin_train, twin_test).
std::string curves_csv(const RunReport& report);
// split,true,pred,count for every cell.
std::string confusion_csv(const RunReport& report);
// Perturb-recover traces in the curves layout: the split names the arm,
// sigma and seed; epochs run through pre and post phases, and the
// untrained post-perturbation accuracy sits at epoch epochs_pre + 0.5.
std::string perturb_curves_csv(const std::vector<baselines::ArmTrace>& traces);

}  // namespace pnn::harness

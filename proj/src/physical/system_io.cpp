#include "pnn/physical/system_io.hpp"

#include <json.hpp>

#include "pnn/core/container.hpp"
#include "pnn/core/error.hpp"
#include "pnn/physical/acoustic.hpp"
#include "pnn/physical/microwave.hpp"
#include "pnn/physical/optics.hpp"

namespace pnn::physical {

std::unique_ptr<Simulator> simulator_from_tensors(const std::string& kind, const std::vector<Tensor>& tensors,
                                                  const std::string& prefix) {
  auto get = [&](const std::string& name) -> const Tensor& { return find_tensor(tensors, prefix + name); };
  if (kind == "optics") {
    return std::make_unique<OpticsSystem>(tensor_to_cmatrix(get("T")), tensor_to_scalar(get("phase_gain")));
  }
  if (kind == "acoustic") {
    return std::make_unique<AcousticSystem>(tensor_to_matrix(get("W_in")), tensor_to_matrix(get("W_out")),
                                            tensor_to_vector(get("gains")), tensor_to_vector(get("exponents")));
  }
  if (kind == "microwave") {
    const Vector map_values = tensor_to_vector(get("pixel_map"));
    std::vector<int> map(static_cast<std::size_t>(map_values.size()));
    for (Eigen::Index i = 0; i < map_values.size(); ++i) map[static_cast<std::size_t>(i)] = static_cast<int>(map_values(i));
    const auto encoding = tensor_to_scalar(get("encoding")) == 0.0 ? PixelEncoding::Binary : PixelEncoding::ContinuousPhase;
    return std::make_unique<MicrowaveSystem>(tensor_to_cmatrix(get("A")), tensor_to_cmatrix(get("u")),
                                             tensor_to_cmatrix(get("v")), std::move(map),
                                             static_cast<int>(tensor_to_scalar(get("input_dim"))),
                                             tensor_to_scalar(get("eta")), tensor_to_scalar(get("phase_on")), encoding);
  }
  throw InvalidSpec("unknown simulator kind '" + kind + "'");
}

void save_system(const std::filesystem::path& path, const Simulator& sys) {
  Container c;
  c.meta_json = nlohmann::json{{"kind", sys.kind()}}.dump();
  c.tensors = sys.parameters("");
  write_container(path, c);
}

std::unique_ptr<Simulator> load_system(const std::filesystem::path& path) {
  const Container c = read_container(path);
  const auto meta = nlohmann::json::parse(c.meta_json);
  if (!meta.is_object() || !meta.contains("kind") || !meta["kind"].is_string()) {
    throw FormatError(path.string() + ": system file metadata lacks 'kind'");
  }
  return simulator_from_tensors(meta["kind"].get<std::string>(), c.tensors);
}

}  // namespace pnn::physical

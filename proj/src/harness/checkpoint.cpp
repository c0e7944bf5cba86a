#include "pnn/harness/checkpoint.hpp"

#include "pnn/core/container.hpp"
#include "pnn/core/error.hpp"
#include "pnn/physical/remote.hpp"
#include "pnn/physical/system_io.hpp"

namespace pnn::harness {

namespace {

std::string layer_prefix(std::size_t l) { return "layer" + std::to_string(l) + "."; }

nlohmann::json embed_json(const LabelEmbedSpec& e) {
  return {{"n_classes", e.n_classes},
          {"offset", e.slot_offset},
          {"value", e.slot_value},
          {"mode", e.mode == EmbedMode::Append ? "append" : "overwrite"}};
}

LabelEmbedSpec embed_from_json(const nlohmann::json& j) {
  LabelEmbedSpec e;
  e.n_classes = j.at("n_classes").get<int>();
  e.slot_offset = j.at("offset").get<int>();
  e.slot_value = j.at("value").get<double>();
  e.mode = j.at("mode").get<std::string>() == "append" ? EmbedMode::Append : EmbedMode::Overwrite;
  return e;
}

// Appends the system's tensors and returns its meta entry.
nlohmann::json describe_system(const physical::ForwardBackend& b, const std::string& prefix,
                               std::vector<Tensor>& tensors) {
  nlohmann::json j = {{"kind", b.kind()}};
  if (const auto* sim = physical::as_simulator(b)) {
    for (Tensor& t : sim->parameters(prefix + "system.")) tensors.push_back(std::move(t));
  } else if (const auto* remote = dynamic_cast<const physical::RemoteSystem*>(&b)) {
    j["endpoint"] = remote->endpoint();
  } else {
    throw UnsupportedOperation("cannot checkpoint a '" + b.kind() + "' backend");
  }
  return j;
}

physical::BackendPtr restore_system(const nlohmann::json& j, const std::vector<Tensor>& tensors,
                                    const std::string& prefix) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "remote") {
    const auto [host, port] = physical::parse_endpoint(j.at("endpoint").get<std::string>());
    return std::make_shared<physical::RemoteSystem>(host, port);
  }
  return physical::simulator_from_tensors(kind, tensors, prefix + "system.");
}

nlohmann::json common_meta(bool skip, double norm_eps, int input_dim, const LabelEmbedSpec& embed) {
  return {{"skip", skip}, {"norm_eps", norm_eps}, {"input_dim", input_dim}, {"embed", embed_json(embed)}};
}

void check_network(const Checkpoint& c, const std::string& expected) {
  const auto it = c.meta.find("network");
  if (it == c.meta.end() || it->get<std::string>() != expected) {
    throw FormatError("checkpoint does not hold a '" + expected + "' network");
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_container(path, Container{ckpt.meta.dump(), ckpt.tensors});
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Container c = read_container(path);
  Checkpoint out;
  try {
    out.meta = nlohmann::json::parse(c.meta_json);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": metadata is not valid JSON: " + e.what());
  }
  out.tensors = std::move(c.tensors);
  return out;
}

Checkpoint ff_checkpoint(const fftrain::FfNetwork& net, nlohmann::json extra_meta) {
  Checkpoint c;
  c.meta = std::move(extra_meta);
  c.meta.update(common_meta(net.skip, net.norm_eps, net.input_dim, net.embed));
  c.meta["network"] = "mfff";
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    c.tensors.push_back(to_tensor(layer_prefix(l) + "weights", layer.weights));
    nlohmann::json j = describe_system(*layer.backend, layer_prefix(l), c.tensors);
    j["theta"] = layer.theta;
    layers.push_back(j);
  }
  c.meta["layers"] = layers;
  return c;
}

Checkpoint bp_checkpoint(const baselines::BpNetwork& net, nlohmann::json extra_meta) {
  Checkpoint c;
  c.meta = std::move(extra_meta);
  c.meta.update(common_meta(net.skip, net.norm_eps, net.input_dim, net.layout));
  c.meta["network"] = "bp";
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    c.tensors.push_back(to_tensor(layer_prefix(l) + "weights", net.layers[l].weights));
    layers.push_back(describe_system(*net.layers[l].backend, layer_prefix(l), c.tensors));
  }
  c.meta["layers"] = layers;
  c.tensors.push_back(to_tensor("readout.weights", net.readout));
  c.tensors.push_back(to_tensor("readout.bias", net.readout_bias));
  return c;
}

fftrain::FfNetwork ff_from_checkpoint(const Checkpoint& c) {
  check_network(c, "mfff");
  fftrain::FfNetwork net;
  net.skip = c.meta.at("skip").get<bool>();
  net.norm_eps = c.meta.at("norm_eps").get<double>();
  net.input_dim = c.meta.at("input_dim").get<int>();
  net.embed = embed_from_json(c.meta.at("embed"));
  const auto& layers = c.meta.at("layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    fftrain::FfLayer layer;
    layer.weights = tensor_to_matrix(find_tensor(c.tensors, layer_prefix(l) + "weights"));
    layer.backend = restore_system(layers[l], c.tensors, layer_prefix(l));
    layer.theta = layers[l].at("theta").get<double>();
    layer.optimizer = Adam(layer.weights.rows(), layer.weights.cols());
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

baselines::BpNetwork bp_from_checkpoint(const Checkpoint& c) {
  check_network(c, "bp");
  baselines::BpNetwork net;
  net.skip = c.meta.at("skip").get<bool>();
  net.norm_eps = c.meta.at("norm_eps").get<double>();
  net.input_dim = c.meta.at("input_dim").get<int>();
  net.layout = embed_from_json(c.meta.at("embed"));
  const auto& layers = c.meta.at("layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    baselines::BpLayer layer;
    layer.weights = tensor_to_matrix(find_tensor(c.tensors, layer_prefix(l) + "weights"));
    layer.backend = restore_system(layers[l], c.tensors, layer_prefix(l));
    layer.optimizer = Adam(layer.weights.rows(), layer.weights.cols());
    net.layers.push_back(std::move(layer));
  }
  net.readout = tensor_to_matrix(find_tensor(c.tensors, "readout.weights"));
  net.readout_bias = tensor_to_vector(find_tensor(c.tensors, "readout.bias"));
  net.readout_optimizer = Adam(net.readout.rows(), net.readout.cols());
  net.bias_optimizer = Adam(net.readout_bias.size(), 1);
  net.validate();
  return net;
}

}  // namespace pnn::harness

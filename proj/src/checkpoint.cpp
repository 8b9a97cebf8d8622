#include "mlgan/checkpoint.hpp"

#include <fstream>

#include "mlgan/errors.hpp"

namespace mlgan {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "mlgan-checkpoint";
constexpr int kVersion = 1;

json tensor_to_json(const Tensor& t) { return {{"shape", t.shape()}, {"data", t.values()}}; }

Tensor tensor_from_json(const json& j) {
  return Tensor(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
}

json params_to_json(const ParamSet& params) {
  json out = json::object();
  for (const auto& [name, t] : params) out[name] = tensor_to_json(t);
  return out;
}

json moments_to_json(const std::vector<Tensor>& moments) {
  json out = json::array();
  for (const auto& t : moments) out.push_back(tensor_to_json(t));
  return out;
}

std::vector<Tensor> moments_from_json(const json& j) {
  std::vector<Tensor> out;
  for (const auto& item : j) out.push_back(tensor_from_json(item));
  return out;
}

json adam_to_json(const AdamState& s) {
  return {{"t", s.t}, {"first_moment", moments_to_json(s.first_moment)},
          {"second_moment", moments_to_json(s.second_moment)}};
}

AdamState adam_from_json(const json& j) {
  AdamState s;
  s.t = j.at("t").get<std::uint64_t>();
  s.first_moment = moments_from_json(j.at("first_moment"));
  s.second_moment = moments_from_json(j.at("second_moment"));
  return s;
}

void write_atomic(const json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw CheckpointError("cannot open '" + tmp.string() + "' for writing");
    out << doc.dump();
    if (!out) throw CheckpointError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CheckpointError("checkpoint '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

nlohmann::json network_to_json(const Mlp& net) {
  return {{"dims", net.dims()},
          {"hidden_activation", activation_name(net.hidden_activation())},
          {"output_activation", activation_name(net.output_activation())},
          {"params", params_to_json(net.params())}};
}

Mlp network_from_json(const nlohmann::json& j) {
  try {
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    Mlp net = Mlp::create(dims, parse_activation(j.at("hidden_activation").get<std::string>()),
                          parse_activation(j.at("output_activation").get<std::string>()), 0);
    ParamSet params;
    for (const auto& [name, t] : j.at("params").items()) params.emplace(name, tensor_from_json(t));
    net.load_params(params);
    return net;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("malformed network record: ") + e.what());
  }
}

void save_network(const Mlp& net, const std::filesystem::path& path) { write_atomic(network_to_json(net), path); }

Mlp load_network(const std::filesystem::path& path) { return network_from_json(read_json(path)); }

void checkpoint_save(const TrainerState& state, const std::filesystem::path& path) {
  json doc = {{"format", kFormat},
              {"version", kVersion},
              {"gen_step", state.gen_step},
              {"critic_updates", state.critic_updates},
              {"rng", state.rng_state},
              {"generator", network_to_json(state.generator)},
              {"discriminator", network_to_json(state.discriminator)},
              {"adam_generator", adam_to_json(state.adam_generator)},
              {"adam_discriminator", adam_to_json(state.adam_discriminator)}};
  write_atomic(doc, path);
}

TrainerState checkpoint_load(const std::filesystem::path& path) {
  const json doc = read_json(path);
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw CheckpointError("not an mlgan checkpoint");
    if (doc.at("version").get<int>() != kVersion) throw CheckpointError("unsupported checkpoint version");
    TrainerState s;
    s.gen_step = doc.at("gen_step").get<std::uint64_t>();
    s.critic_updates = doc.at("critic_updates").get<std::uint64_t>();
    s.rng_state = doc.at("rng").get<std::string>();
    s.generator = network_from_json(doc.at("generator"));
    s.discriminator = network_from_json(doc.at("discriminator"));
    s.adam_generator = adam_from_json(doc.at("adam_generator"));
    s.adam_discriminator = adam_from_json(doc.at("adam_discriminator"));
    return s;
  } catch (const CheckpointError& e) {
    throw CheckpointError("checkpoint '" + path.string() + "': " + e.what());
  } catch (const std::exception& e) {
    throw CheckpointError("checkpoint '" + path.string() + "' is malformed: " + e.what());
  }
}

}  // namespace mlgan

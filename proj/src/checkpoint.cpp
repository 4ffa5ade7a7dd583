#include "hanalab/checkpoint.hpp"

#include "hanalab/json_io.hpp"

namespace hanalab {

Eigen::VectorXd mlp_to_row_major(const Mlp& net) {
  Eigen::VectorXd flat(net.param_count());
  long at = 0;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    for (long r = 0; r < w.rows(); ++r)
      for (long c = 0; c < w.cols(); ++c) flat[at++] = w(r, c);
    flat.segment(at, net.biases[l].size()) = net.biases[l];
    at += net.biases[l].size();
  }
  return flat;
}

void mlp_from_row_major(Mlp& net, const Eigen::VectorXd& flat) {
  if (flat.size() != net.param_count()) throw VersionError("checkpoint weight count mismatch");
  long at = 0;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    auto& w = net.weights[l];
    for (long r = 0; r < w.rows(); ++r)
      for (long c = 0; c < w.cols(); ++c) w(r, c) = flat[at++];
    net.biases[l] = flat.segment(at, net.biases[l].size());
    at += net.biases[l].size();
  }
}

std::string Checkpoint::to_json_text() const {
  std::string out = "{\n";
  out += "\"format_version\": \"" + std::string(kCheckpointFormatVersion) + "\",\n";
  out += "\"template_version\": \"" + template_version + "\",\n";
  out += "\"hash_dim\": " + std::to_string(hash_dim) + ",\n";
  out += "\"head\": \"" + head + "\",\n";
  out += "\"layer_sizes\": {";
  bool first = true;
  for (const auto& [name, net] : nets) {
    if (!first) out += ", ";
    first = false;
    out += "\"" + name + "\": [";
    for (size_t i = 0; i < net.sizes.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(net.sizes[i]);
    }
    out += ']';
  }
  out += "},\n\"weights\": {";
  first = true;
  for (const auto& [name, net] : nets) {
    if (!first) out += ", ";
    first = false;
    if (!net.finite()) throw TrainingError("refusing to save non-finite parameters");
    out += "\"" + name + "\": " + format_real_array(mlp_to_row_major(net));
  }
  out += "},\n\"optimizer_state\": ";
  if (!optimizer_type) {
    out += "null";
  } else {
    out += "{\"type\": \"" + *optimizer_type + "\", \"step\": " + std::to_string(optimizer_step);
    if (*optimizer_type == "adam") {
      out += ", \"m\": " + format_real_array(optimizer_m);
      out += ", \"v\": " + format_real_array(optimizer_v);
    }
    out += "}";
  }
  out += ",\n\"rng_seed\": " + std::to_string(rng_seed) + "\n}\n";
  return out;
}

Checkpoint Checkpoint::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format_version").get<std::string>() != kCheckpointFormatVersion)
    throw VersionError("unknown checkpoint format version");
  Checkpoint ck;
  ck.template_version = j.at("template_version").get<std::string>();
  ck.hash_dim = j.at("hash_dim").get<int>();
  ck.rng_seed = j.at("rng_seed").get<uint64_t>();
  ck.head = j.at("head").get<std::string>();
  for (const auto& [name, sizes_json] : j.at("layer_sizes").items()) {
    Mlp net = Mlp::zeros(sizes_json.get<std::vector<int>>());
    const auto& weights = j.at("weights").at(name);
    Eigen::VectorXd flat(weights.size());
    for (size_t i = 0; i < weights.size(); ++i) flat[long(i)] = weights[i].get<double>();
    mlp_from_row_major(net, flat);
    ck.nets.emplace(name, std::move(net));
  }
  const auto& opt = j.at("optimizer_state");
  if (!opt.is_null()) {
    ck.optimizer_type = opt.at("type").get<std::string>();
    ck.optimizer_step = opt.at("step").get<long>();
    if (*ck.optimizer_type == "adam") {
      const auto& m = opt.at("m");
      const auto& v = opt.at("v");
      ck.optimizer_m.resize(long(m.size()));
      ck.optimizer_v.resize(long(v.size()));
      for (size_t i = 0; i < m.size(); ++i) ck.optimizer_m[long(i)] = m[i].get<double>();
      for (size_t i = 0; i < v.size(); ++i) ck.optimizer_v[long(i)] = v[i].get<double>();
    }
  }
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  write_text_file(path, to_json_text());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path,
                            const std::string& expected_template_version) {
  Checkpoint ck = from_json_text(read_text_file(path));
  if (ck.template_version != expected_template_version)
    throw VersionError("checkpoint template version '" + ck.template_version +
                       "' does not match '" + expected_template_version + "'");
  return ck;
}

}  // namespace hanalab

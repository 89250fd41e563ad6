#include "inferno/nn/model_io.hpp"

#include <fstream>
#include <stdexcept>

namespace inferno::nn {

using nlohmann::json;

void save_model(const std::string& path, const ModelFile& m) {
  json j;
  j["format_version"] = 1;
  j["kind"] = m.kind;
  j["widths"] = m.params.widths();
  j["tau"] = m.params.tau;
  j["seed"] = m.seed;
  j["benchmark_id"] = m.benchmark_id;
  j["training_config"] = m.training_config;
  json weights = json::array(), biases = json::array();
  for (std::size_t l = 0; l < m.params.w.size(); ++l) {
    std::vector<double> wl;
    wl.reserve(static_cast<std::size_t>(m.params.w[l].size()));
    for (Eigen::Index i = 0; i < m.params.w[l].rows(); ++i)
      for (Eigen::Index jx = 0; jx < m.params.w[l].cols(); ++jx) wl.push_back(m.params.w[l](i, jx));
    weights.push_back(wl);
    std::vector<double> bl(m.params.b[l].data(), m.params.b[l].data() + m.params.b[l].size());
    biases.push_back(bl);
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << j.dump(2) << "\n";
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_model: " + path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
    throw std::runtime_error("load_model: unsupported format in " + path);
  ModelFile m;
  m.kind = j["kind"].get<std::string>();
  m.seed = j["seed"].get<std::uint64_t>();
  m.benchmark_id = j["benchmark_id"].get<int>();
  m.training_config = j.value("training_config", nlohmann::json::object());
  const auto widths = j["widths"].get<std::vector<int>>();
  m.params.tau = j["tau"].get<double>();
  const auto& weights = j["weights"];
  const auto& biases = j["biases"];
  if (weights.size() + 1 != widths.size() || biases.size() != weights.size())
    throw std::runtime_error("load_model: inconsistent layer structure in " + path);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in_w = widths[l], out_w = widths[l + 1];
    const auto wl = weights[l].get<std::vector<double>>();
    const auto bl = biases[l].get<std::vector<double>>();
    if (wl.size() != static_cast<std::size_t>(in_w * out_w) ||
        bl.size() != static_cast<std::size_t>(out_w))
      throw std::runtime_error("load_model: bad layer shape in " + path);
    Eigen::MatrixXd wm(out_w, in_w);
    for (int i = 0; i < out_w; ++i)
      for (int jx = 0; jx < in_w; ++jx) wm(i, jx) = wl[static_cast<std::size_t>(i * in_w + jx)];
    m.params.w.push_back(std::move(wm));
    m.params.b.push_back(Eigen::Map<const Eigen::VectorXd>(bl.data(), out_w));
  }
  return m;
}

}  // namespace inferno::nn

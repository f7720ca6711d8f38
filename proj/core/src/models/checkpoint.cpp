#include "engage/models/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "engage/error.hpp"
#include "engage/models/cnn.hpp"
#include "engage/models/gru.hpp"
#include "engage/models/logistic.hpp"

namespace engage {

namespace {

const std::string& need(const std::map<std::string, std::string>& c, const std::string& key) {
  auto it = c.find(key);
  if (it == c.end()) throw DataError("checkpoint config lacks '" + key + "'");
  return it->second;
}

int need_int(const std::map<std::string, std::string>& c, const std::string& key) {
  try {
    return std::stoi(need(c, key));
  } catch (const std::logic_error&) {
    throw DataError("checkpoint config '" + key + "' is not an integer");
  }
}

double need_double(const std::map<std::string, std::string>& c, const std::string& key) {
  try {
    return std::stod(need(c, key));
  } catch (const std::logic_error&) {
    throw DataError("checkpoint config '" + key + "' is not a number");
  }
}

nlohmann::json tensor_json(const std::string& name, const Eigen::MatrixXd& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd tensor_from(const nlohmann::json& t) {
  const auto rows = t.at("rows").get<Eigen::Index>();
  const auto cols = t.at("cols").get<Eigen::Index>();
  const auto& data = t.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw DataError("tensor " + t.at("name").get<std::string>() + " declares " +
                    std::to_string(rows) + "x" + std::to_string(cols) + " but holds " +
                    std::to_string(data.size()) + " values");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  return m;
}

}  // namespace

std::unique_ptr<Classifier> make_classifier(const std::string& arch,
                                            const std::map<std::string, std::string>& config) {
  if (arch == "logistic")
    return std::make_unique<LogisticModel>(parse_feature_set(need(config, "features")),
                                           need_int(config, "n_features"));
  if (arch == "cnn") {
    CnnConfig c;
    c.dim = need_int(config, "dim");
    c.maps = need_int(config, "maps");
    c.dropout = need_double(config, "dropout");
    c.widths.clear();
    std::stringstream ss(need(config, "widths"));
    std::string item;
    while (std::getline(ss, item, ',')) c.widths.push_back(std::stoi(item));
    return std::make_unique<CnnModel>(c);
  }
  if (arch == "gru") {
    GruConfig c;
    c.dim = need_int(config, "dim");
    c.hidden = need_int(config, "hidden");
    c.dense = need_int(config, "dense");
    c.dropout = need_double(config, "dropout");
    c.spatial_dropout = need_double(config, "spatial_dropout");
    return std::make_unique<GruModel>(c);
  }
  throw DataError("unknown architecture '" + arch + "'");
}

void save_checkpoint(const Classifier& model, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& metadata) {
  nlohmann::json j;
  j["format"] = "engage-checkpoint";
  j["version"] = 1;
  j["arch"] = std::string(model.arch());
  j["config"] = model.config();
  j["metadata"] = metadata;
  j["tensors"] = nlohmann::json::array();
  for (const auto& p : model.params()) j["tensors"].push_back(tensor_json(p.name, p.value));
  j["buffers"] = nlohmann::json::array();
  for (const auto& [name, m] : model.buffers()) j["buffers"].push_back(tensor_json(name, m));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  try {
    if (j.value("format", "") != "engage-checkpoint") throw DataError(path.string() + ": not a checkpoint");
    LoadedCheckpoint out;
    out.model = make_classifier(j.at("arch").get<std::string>(),
                                j.at("config").get<std::map<std::string, std::string>>());
    out.metadata = j.value("metadata", std::map<std::string, std::string>{});
    auto& params = out.model->params();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != params.size())
      throw DataError(path.string() + ": expected " + std::to_string(params.size()) + " tensors, found " +
                      std::to_string(tensors.size()));
    for (const auto& t : tensors) {
      auto& p = params.at(t.at("name").get<std::string>());
      Eigen::MatrixXd m = tensor_from(t);
      if (m.rows() != p.value.rows() || m.cols() != p.value.cols())
        throw DataError(path.string() + ": tensor " + p.name + " has the wrong shape");
      p.value = std::move(m);
    }
    for (const auto& b : j.value("buffers", nlohmann::json::array()))
      out.model->set_buffer(b.at("name").get<std::string>(), tensor_from(b));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const UsageError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace engage

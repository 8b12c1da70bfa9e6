#include "mhgame/io.hpp"

#include <fstream>

#include <json.hpp>

#include "mhgame/error.hpp"

namespace mhgame {

using nlohmann::json;

void write_instance(std::ostream& out, const Scenario& scenario, const CodeBook& codes) {
  const std::size_t n = scenario.users();
  json doc;
  doc["seed"] = scenario.seed;
  doc["noise_power"] = scenario.noise_power;
  doc["access_point"] = {scenario.access_point.x, scenario.access_point.y};
  doc["positions"] = json::array();
  for (const Point& p : scenario.positions) doc["positions"].push_back({p.x, p.y});
  doc["next_hop"] = json::array();
  for (NodeIndex m : scenario.next_hop)
    doc["next_hop"].push_back(scenario.is_access_point(m) ? -1 : static_cast<long long>(m));
  doc["gains"] = json::array();
  for (std::size_t m = 0; m <= n; ++m) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(scenario.gains(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)));
    doc["gains"].push_back(std::move(row));
  }
  const Eigen::MatrixXi chips = codes.chips();
  doc["processing_gain"] = codes.length();
  doc["chips"] = json::array();
  for (Eigen::Index k = 0; k < chips.cols(); ++k) {
    json code = json::array();
    for (Eigen::Index i = 0; i < chips.rows(); ++i) code.push_back(chips(i, k));
    doc["chips"].push_back(std::move(code));
  }
  out << doc.dump(1) << '\n';
}

Instance read_instance(std::istream& in) {
  json doc;
  try {
    in >> doc;
    Scenario s;
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.noise_power = doc.at("noise_power").get<double>();
    s.access_point = {doc.at("access_point").at(0).get<double>(), doc.at("access_point").at(1).get<double>()};
    for (const json& p : doc.at("positions")) s.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    const std::size_t n = s.positions.size();
    for (const json& m : doc.at("next_hop")) {
      const long long hop = m.get<long long>();
      s.next_hop.push_back(hop < 0 ? n : static_cast<NodeIndex>(hop));
    }
    const json& rows = doc.at("gains");
    s.gains = GainMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t m = 0; m < rows.size(); ++m) {
      if (rows[m].size() != n) throw Error(ErrorCode::InvalidArgument, "gain row length must equal K");
      for (std::size_t j = 0; j < n; ++j) s.gains(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = rows[m][j].get<double>();
    }
    validate(s);

    const std::size_t length = doc.at("processing_gain").get<std::size_t>();
    const json& codes = doc.at("chips");
    if (codes.size() != n) throw Error(ErrorCode::InvalidArgument, "need one code per user");
    Eigen::MatrixXi chips(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      if (codes[k].size() != length) throw Error(ErrorCode::InvalidArgument, "code length must equal N");
      for (std::size_t i = 0; i < length; ++i) chips(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = codes[k][i].get<int>();
    }
    return Instance{std::move(s), CodeBook(chips)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed instance file: ") + e.what());
  }
}

void save_instance(const std::filesystem::path& path, const Scenario& scenario, const CodeBook& codes) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  write_instance(out, scenario, codes);
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  return read_instance(in);
}

}  // namespace mhgame

#include "conbandit/instance_io.hpp"

#include <cstdio>

#include <json.hpp>

#include "conbandit/error.hpp"

namespace conbandit {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

template <typename Row>
void append_row(std::string& out, const Row& row) {
  out += '[';
  for (std::size_t a = 0; a < row.size(); ++a) {
    if (a) out += ',';
    append_double(out, row[a]);
  }
  out += ']';
}

}  // namespace

std::string instance_to_json(const ProblemInstance& inst) {
  const std::size_t T = inst.horizon(), m = inst.constraints();
  std::string out = "{\"T\":" + std::to_string(T) + ",\"K\":" + std::to_string(inst.arms()) +
                    ",\"m\":" + std::to_string(m) + ",\"loss_means\":[";
  for (std::size_t t = 0; t < T; ++t) {
    if (t) out += ',';
    append_row(out, inst.loss_row(t));
  }
  out += "],\"constraint_means\":[";
  for (std::size_t i = 0; i < m; ++i) {
    if (i) out += ',';
    out += '[';
    for (std::size_t t = 0; t < T; ++t) {
      if (t) out += ',';
      append_row(out, inst.constraint_row(i, t));
    }
    out += ']';
  }
  out += "]}\n";
  return out;
}

ProblemInstance instance_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::invalid_config, std::string("instance JSON: ") + e.what());
  }
  try {
    const auto T = doc.at("T").get<std::size_t>();
    const auto K = doc.at("K").get<std::size_t>();
    const auto m = doc.at("m").get<std::size_t>();
    std::vector<double> losses;
    losses.reserve(T * K);
    const auto& lm = doc.at("loss_means");
    if (lm.size() != T) throw Error(ErrorCode::invalid_dimension, "loss_means needs T rows");
    for (const auto& row : lm) {
      if (row.size() != K) throw Error(ErrorCode::invalid_dimension, "loss row needs K entries");
      for (const auto& v : row) losses.push_back(v.get<double>());
    }
    std::vector<double> constraints;
    constraints.reserve(m * T * K);
    const auto& cm = doc.at("constraint_means");
    if (cm.size() != m) throw Error(ErrorCode::invalid_dimension, "constraint_means needs m blocks");
    for (const auto& block : cm) {
      if (block.size() != T) throw Error(ErrorCode::invalid_dimension, "constraint block needs T rows");
      for (const auto& row : block) {
        if (row.size() != K) throw Error(ErrorCode::invalid_dimension, "constraint row needs K entries");
        for (const auto& v : row) constraints.push_back(v.get<double>());
      }
    }
    return ProblemInstance(T, K, m, std::move(losses), std::move(constraints));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("instance JSON: ") + e.what());
  }
}

}  // namespace conbandit

#pragma once

// JSON access with field-path diagnostics, and the MDP / linear system
// interchange formats.
//
// MDP:    {"S": int, "A": int, "gamma": real, "P": [S][A][S], "R": [S][A],
//          "reward_range": [lo, hi] (optional, default [0, 1])}
// System: {"A", "B", "C"?, "Sw"?, "Sv"?, "Phi"?, "Psi"?}, matrices as row arrays.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdm/error.hpp"
#include "sdm/linear_control.hpp"
#include "sdm/mdp.hpp"

namespace sdm {

using Json = nlohmann::json;

namespace io {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string join(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path.empty() ? "<root>" : path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(join(path, key), "required field is missing");
  return *it;
}

inline double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  return j.get<double>();
}

inline long long as_integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError(path, "expected an integer");
  return j.get<long long>();
}

inline std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

inline bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ValidationError(path, "expected a boolean");
  return j.get<bool>();
}

inline double number(const Json& j, const std::string& key, const std::string& path) {
  return as_number(require(j, key, path), join(path, key));
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& path) {
  return j.contains(key) ? as_number(j.at(key), join(path, key)) : fallback;
}

inline long long integer(const Json& j, const std::string& key, const std::string& path) {
  return as_integer(require(j, key, path), join(path, key));
}

inline long long integer_or(const Json& j, const std::string& key, long long fallback, const std::string& path) {
  return j.contains(key) ? as_integer(j.at(key), join(path, key)) : fallback;
}

inline std::string string_or(const Json& j, const std::string& key, const std::string& fallback,
                             const std::string& path) {
  return j.contains(key) ? as_string(j.at(key), join(path, key)) : fallback;
}

inline bool bool_or(const Json& j, const std::string& key, bool fallback, const std::string& path) {
  return j.contains(key) ? as_bool(j.at(key), join(path, key)) : fallback;
}

inline void require_range(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ValidationError(path, what);
}

/// Flat array of numbers; a bare number reads as a length-1 vector.
inline Eigen::VectorXd as_vector(const Json& j, const std::string& path) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a nonempty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_number(j[i], join(path, i));
  return v;
}

/// Array of equal-length rows; a bare number reads as 1x1.
inline Eigen::MatrixXd as_matrix(const Json& j, const std::string& path) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw ValidationError(join(path, 0), "expected a nonempty row");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = join(path, r);
    if (!j[r].is_array() || j[r].size() != cols)
      throw ValidationError(rp, "expected a row of length " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_number(j[r][c], join(rp, c));
  }
  return m;
}

inline Json to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path, std::string("invalid JSON: ") + e.what());
  }
}

/// Shortest round-trip decimal form.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// FNV-1a over the bytes of s.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) out[static_cast<std::size_t>(i)] = digits[x & 0xF];
  return out;
}

}  // namespace io

inline TabularMdp mdp_from_json(const Json& j, const std::string& path = "") {
  using namespace io;
  const long long S = integer(j, "S", path), A = integer(j, "A", path);
  require_range(S >= 1, join(path, "S"), "must be >= 1");
  require_range(A >= 1, join(path, "A"), "must be >= 1");
  const double gamma = number(j, "gamma", path);
  const Json& P = require(j, "P", path);
  const Json& R = require(j, "R", path);
  const std::string pp = join(path, "P"), rp = join(path, "R");
  if (!P.is_array() || P.size() != static_cast<std::size_t>(S))
    throw ValidationError(pp, "expected " + std::to_string(S) + " state blocks");
  const Eigen::MatrixXd reward = as_matrix(R, rp);
  if (reward.rows() != S || reward.cols() != A)
    throw ValidationError(rp, "expected an S x A table");
  Eigen::MatrixXd trans(S * A, S);
  for (std::size_t s = 0; s < static_cast<std::size_t>(S); ++s) {
    const Eigen::MatrixXd block = as_matrix(P[s], join(pp, s));
    if (block.rows() != A || block.cols() != S)
      throw ValidationError(join(pp, s), "expected an A x S block");
    trans.middleRows(static_cast<Eigen::Index>(s) * A, A) = block;
  }
  RewardRange range;
  if (j.contains("reward_range")) {
    const Eigen::VectorXd r = as_vector(j["reward_range"], join(path, "reward_range"));
    require_range(r.size() == 2, join(path, "reward_range"), "expected [lo, hi]");
    range = {r(0), r(1)};
  }
  try {
    return TabularMdp(static_cast<int>(S), static_cast<int>(A), std::move(trans), reward, gamma, range);
  } catch (const Error& e) {
    throw ValidationError(path.empty() ? "<mdp>" : path, e.what());
  }
}

inline Json mdp_to_json(const TabularMdp& mdp) {
  Json P = Json::array();
  for (int s = 0; s < mdp.num_states(); ++s)
    P.push_back(io::to_json(Eigen::MatrixXd(mdp.transition_matrix().middleRows(s * mdp.num_actions(), mdp.num_actions()))));
  return Json{{"S", mdp.num_states()},
              {"A", mdp.num_actions()},
              {"gamma", mdp.discount()},
              {"P", P},
              {"R", io::to_json(mdp.reward())},
              {"reward_range", Json::array({mdp.reward_range().lo, mdp.reward_range().hi})}};
}

inline LinearSystem system_from_json(const Json& j, const std::string& path = "") {
  using namespace io;
  auto opt = [&](const char* key) -> std::optional<Eigen::MatrixXd> {
    if (!j.contains(key)) return std::nullopt;
    return as_matrix(j[key], join(path, key));
  };
  try {
    return LinearSystem::make(as_matrix(require(j, "A", path), join(path, "A")),
                              as_matrix(require(j, "B", path), join(path, "B")), opt("C"), opt("Sw"), opt("Sv"));
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(path.empty() ? "<system>" : path, e.what());
  }
}

/// Phi defaults to I and Psi to I when absent.
inline QuadraticCost cost_from_json(const Json& j, const LinearSystem& sys, const std::string& path = "") {
  using namespace io;
  QuadraticCost cost{Eigen::MatrixXd::Identity(sys.state_dim(), sys.state_dim()),
                     Eigen::MatrixXd::Identity(sys.input_dim(), sys.input_dim())};
  if (j.contains("Phi")) cost.Phi = as_matrix(j["Phi"], join(path, "Phi"));
  if (j.contains("Psi")) cost.Psi = as_matrix(j["Psi"], join(path, "Psi"));
  try {
    cost.validate_for(sys);
  } catch (const Error& e) {
    throw ValidationError(path.empty() ? "<cost>" : path, e.what());
  }
  return cost;
}

inline Json system_to_json(const LinearSystem& sys, const std::optional<QuadraticCost>& cost = {}) {
  Json j{{"A", io::to_json(sys.A)}, {"B", io::to_json(sys.B)}, {"C", io::to_json(sys.C)},
         {"Sw", io::to_json(sys.Sw)}, {"Sv", io::to_json(sys.Sv)}};
  if (cost) {
    j["Phi"] = io::to_json(cost->Phi);
    j["Psi"] = io::to_json(cost->Psi);
  }
  return j;
}

}  // namespace sdm

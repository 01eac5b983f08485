#pragma once

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afem.hpp"
#include "common.hpp"

namespace hdiv_afem {

inline constexpr const char *history_csv_header = "level,cells,dofs,eta,error,effectivity,osc,Q,ratio";

namespace detail {

inline void put_real(std::ostream &os, double v)
{
  if (std::isnan(v))
    os << "nan";
  else
    os << v;
}

inline double get_real(const std::string &s)
{
  if (s == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size())
    throw Error("history: malformed number '" + s + "'");
  return v;
}

inline nlohmann::json real_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline double json_real(const nlohmann::json &j)
{
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

} // namespace detail

/// One row per level with the columns of `history_csv_header`.
inline void write_history_csv(std::ostream &os, const AfemHistory &h)
{
  os << history_csv_header << '\n';
  const auto old = os.precision(17);
  for (const LevelRecord &r : h.rows)
  {
    os << r.level << ',' << r.cells << ',' << r.dofs;
    for (double v : {r.eta, r.error, r.effectivity, r.osc, r.Q, r.ratio})
    {
      os << ',';
      detail::put_real(os, v);
    }
    os << '\n';
  }
  os.precision(old);
}

/// Reads the CSV columns back; diagnostics absent from the CSV stay default.
inline AfemHistory read_history_csv(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line) || line != history_csv_header)
    throw Error("history csv: unexpected header");
  AfemHistory h;
  while (std::getline(is, line))
  {
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      f.push_back(cell);
    if (f.size() != 9)
      throw Error("history csv: expected 9 fields, got " + std::to_string(f.size()));
    LevelRecord r;
    r.level = std::stoi(f[0]);
    r.cells = std::stoi(f[1]);
    r.dofs = std::stol(f[2]);
    r.eta = detail::get_real(f[3]);
    r.error = detail::get_real(f[4]);
    r.effectivity = detail::get_real(f[5]);
    r.osc = detail::get_real(f[6]);
    r.Q = detail::get_real(f[7]);
    r.ratio = detail::get_real(f[8]);
    h.rows.push_back(r);
  }
  return h;
}

/// Full record. Schema:
///   { "problem": str, "order": int, "theta": real, "gamma": real,
///     "mode": "adaptive"|"uniform", "rho": real|null, "stop_reason": str,
///     "levels": [ { "level", "cells", "dofs", "eta", "error", "effectivity",
///                   "osc", "Q", "ratio", "a_ip", "jump_term", "velocity_norm",
///                   "max_divergence", "max_cell_level", "marked" } ] }
/// Non-finite reals are stored as null.
inline nlohmann::json history_to_json(const AfemHistory &h)
{
  using detail::real_json;
  nlohmann::json levels = nlohmann::json::array();
  for (const LevelRecord &r : h.rows)
    levels.push_back({{"level", r.level},
                      {"cells", r.cells},
                      {"dofs", r.dofs},
                      {"eta", real_json(r.eta)},
                      {"error", real_json(r.error)},
                      {"effectivity", real_json(r.effectivity)},
                      {"osc", real_json(r.osc)},
                      {"Q", real_json(r.Q)},
                      {"ratio", real_json(r.ratio)},
                      {"a_ip", real_json(r.a_ip)},
                      {"jump_term", real_json(r.jump_term)},
                      {"velocity_norm", real_json(r.velocity_norm)},
                      {"max_divergence", real_json(r.max_divergence)},
                      {"max_cell_level", r.max_cell_level},
                      {"marked", r.marked}});
  return {{"problem", h.problem},      {"order", h.order},       {"theta", real_json(h.theta)},
          {"gamma", real_json(h.gamma)}, {"mode", to_string(h.mode)}, {"rho", real_json(h.rho)},
          {"stop_reason", h.stop_reason}, {"levels", levels}};
}

inline AfemHistory history_from_json(const nlohmann::json &j)
{
  using detail::json_real;
  AfemHistory h;
  try
  {
    h.problem = j.at("problem").get<std::string>();
    h.order = j.at("order").get<int>();
    h.theta = json_real(j.at("theta"));
    h.gamma = json_real(j.at("gamma"));
    h.mode = parse_mode(j.at("mode").get<std::string>());
    h.rho = json_real(j.at("rho"));
    h.stop_reason = j.at("stop_reason").get<std::string>();
    for (const auto &l : j.at("levels"))
    {
      LevelRecord r;
      r.level = l.at("level").get<int>();
      r.cells = l.at("cells").get<int>();
      r.dofs = l.at("dofs").get<long>();
      r.eta = json_real(l.at("eta"));
      r.error = json_real(l.at("error"));
      r.effectivity = json_real(l.at("effectivity"));
      r.osc = json_real(l.at("osc"));
      r.Q = json_real(l.at("Q"));
      r.ratio = json_real(l.at("ratio"));
      r.a_ip = json_real(l.at("a_ip"));
      r.jump_term = json_real(l.at("jump_term"));
      r.velocity_norm = json_real(l.at("velocity_norm"));
      r.max_divergence = json_real(l.at("max_divergence"));
      r.max_cell_level = l.at("max_cell_level").get<int>();
      r.marked = l.at("marked").get<int>();
      h.rows.push_back(r);
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error(std::string("history json: ") + e.what());
  }
  return h;
}

inline void write_history_json(std::ostream &os, const AfemHistory &h) { os << history_to_json(h).dump(2) << '\n'; }

inline AfemHistory read_history_json(std::istream &is)
{
  nlohmann::json j;
  try
  {
    is >> j;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error(std::string("history json: ") + e.what());
  }
  return history_from_json(j);
}

/// gnuplot data block: DOFs, error, eta.
inline void write_plot_block(std::ostream &os, const AfemHistory &h)
{
  os << "# " << h.problem << ' ' << to_string(h.mode) << " m=" << h.order << " theta=" << h.theta << '\n';
  os << "# dofs error eta\n";
  const auto old = os.precision(17);
  for (const LevelRecord &r : h.rows)
  {
    os << r.dofs << ' ';
    detail::put_real(os, r.error);
    os << ' ';
    detail::put_real(os, r.eta);
    os << '\n';
  }
  os.precision(old);
}

} // namespace hdiv_afem

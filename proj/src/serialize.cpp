#include "wm/serialize.hpp"

namespace wm {

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json to_json(const Mat3& m) {
  Json j = Json::array();
  for (int r = 0; r < 3; ++r) j.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return j;
}

Json to_json(const EnergyBreakdown& e) {
  Json j{{"willmore", e.willmore},
         {"smoother", e.smoother},
         {"onofri", e.onofri},
         {"total", e.total},
         {"area", e.area},
         {"sigma", e.sigma},
         {"l_sigma", e.l_sigma},
         {"sigma_derivative", e.sigma_derivative},
         {"mesh_hash", e.mesh_hash},
         {"gauge_hash", e.gauge_hash}};
  j["multiplier"] = e.multiplier ? Json(*e.multiplier) : Json(nullptr);
  return j;
}

Json to_json(const BoundsReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs},
                      {"pass", c.pass},
                      {"applicable", c.applicable},
                      {"alarm", c.alarm}});
  return {{"checks", checks}, {"all_pass", r.all_pass()}};
}

Json to_json(const OnofriReport& r) {
  return {{"dirichlet", r.dirichlet}, {"linear", r.linear}, {"log_area", r.log_area}, {"onofri", r.onofri_value}};
}

Json to_json(const MobiusS2& m) { return {{"a", to_json(m.a)}, {"rot", to_json(m.rot)}}; }

Json to_json(const ConservationReport& r) {
  return {{"dL_closedness", r.dL_closedness},
          {"scalar_law", r.scalar_law},
          {"vector_law", r.vector_law},
          {"codazzi", r.codazzi},
          {"D_curl", r.D_curl}};
}

Json to_json(const Bubble& b) { return {{"center", b.center}, {"radius", b.radius}, {"energy", b.energy}}; }

Json to_json(const SweepRecord& s) {
  return {{"sigma", s.sigma}, {"sweep", s.sweep}, {"width", s.width}, {"argmax", s.argmax}};
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Stagnation: return "stagnation";
    case StopReason::MaxSweeps: return "max_sweeps";
    case StopReason::PinnedMaximum: return "pinned_maximum";
    case StopReason::NothingToDo: return "nothing_to_do";
  }
  return "unknown";
}

Json to_json(const SigmaStage& s) {
  return {{"sigma", s.sigma},
          {"width", s.width},
          {"argmax", s.argmax},
          {"willmore_at_max", s.willmore_at_max},
          {"struwe", s.struwe},
          {"accepted", s.accepted},
          {"stop", to_string(s.reason)}};
}

Json to_json(const MinmaxReport& r) {
  Json j;
  j["beta_trace"] = Json::array();
  for (const auto& s : r.beta_trace) j["beta_trace"].push_back(to_json(s));
  j["stages"] = Json::array();
  for (const auto& s : r.stages) j["stages"].push_back(to_json(s));
  j["accepted_sigmas"] = r.accepted_sigmas;
  j["beta0"] = r.beta0 ? Json(*r.beta0) : Json(nullptr);
  j["min_struwe"] = r.min_struwe;
  j["argmax_frames"] = r.argmax_frames;
  j["willmore_at_max"] = r.willmore_at_max;
  j["bubble_flags"] = Json::array();
  for (const auto& frame : r.bubble_flags) {
    Json f = Json::array();
    for (const auto& b : frame) f.push_back(to_json(b));
    j["bubble_flags"].push_back(f);
  }
  j["final_energies"] = r.final_energies;
  j["width_monotone_in_sigma"] = r.width_monotone_in_sigma;
  j["above_lower_bound"] = r.above_lower_bound;
  j["reparametrized"] = r.reparametrized;
  return j;
}

}  // namespace wm

#pragma once

#include "json.hpp"

#include "wm/energy.hpp"
#include "wm/gauge.hpp"
#include "wm/minmax.hpp"
#include "wm/variation.hpp"

namespace wm {

using Json = nlohmann::json;

Json to_json(const Vec3& v);
Json to_json(const Mat3& m);
Json to_json(const EnergyBreakdown& e);
Json to_json(const BoundsReport& r);
Json to_json(const OnofriReport& r);
Json to_json(const MobiusS2& m);
Json to_json(const ConservationReport& r);  // norms only
Json to_json(const Bubble& b);
Json to_json(const SweepRecord& s);
Json to_json(const SigmaStage& s);
Json to_json(const MinmaxReport& r);
const char* to_string(StopReason r);

}  // namespace wm

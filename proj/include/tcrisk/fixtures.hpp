#pragma once

#include "tcrisk/topology.hpp"

namespace tcrisk {

/// Two lines, 7 stations, exactly one transfer station.
Network make_toy_network();

/// Synthetic network at the scale of the Chongqing system: 10 lines,
/// 168 stations, 362 directed sections, 22 transfer stations. Per-line
/// transfer-station counts follow the published line table; one adjacent
/// station pair is shared by two lines so its section pair belongs to both.
Network make_chongqing_network();

}  // namespace tcrisk

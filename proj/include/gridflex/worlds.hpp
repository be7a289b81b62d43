#pragma once

// Synthetic worlds shipped with the engine: randomized desk instances and the
// small named fixtures behind the acceptance checks and bundled networks.

#include <cstdint>
#include <string>
#include <vector>

#include "gridflex/netmodel.hpp"
#include "gridflex/scenario.hpp"

namespace gridflex::worlds {

/// Meshed 8-node TSO grid and meshed 6-node DSO grid joined by two
/// interfaces, 24 hours, thermal/hydro/nuclear/wind/solar units and DR, ESS,
/// RES and generic FSPs on both sides. Fully determined by `seed`.
Network desk_instance(std::uint64_t seed, int hours = 24);

/// Two TSO nodes and a three-node DSO behind one interface whose first
/// subscription level binds; one cheap 5 MW DR FSP inside the DSO.
Network subscription_relief(double fsp_mw = 5.0);

/// DSO with a tight internal ring, for demand x fsp_size NSF surfaces.
Network congestible_dso();

/// TSO ring and DSO ring with the replication hosting nodes free.
Network replication_base();

/// Two distribution-connected wind farms for replication_base().
Replication replication_wind_farms();

/// Synthetic hourly demand for one calendar year, one row per node-hour.
DemandData synthetic_year(const Network& net, int year, std::uint64_t seed);

struct NamedNetwork {
  std::string name;
  Network net;
};

/// Every network bundled under data/.
std::vector<NamedNetwork> bundled();

}  // namespace gridflex::worlds

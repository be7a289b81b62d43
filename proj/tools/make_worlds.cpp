#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gridflex/netmodel.hpp"
#include "gridflex/worlds.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void write(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  std::cout << path.string() << '\n';
}

Json replication_records() {
  gridflex::Network holder;
  holder.generators = gridflex::worlds::replication_wind_farms().generators;
  std::ostringstream os;
  gridflex::write_network(holder, os);
  return Json::parse(os.str()).at("generators");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "data";
  fs::create_directories(dir / "studies");
  for (const auto& w : gridflex::worlds::bundled()) {
    const auto path = dir / (w.name + ".json");
    gridflex::save_network(w.net, path.string());
    std::cout << path.string() << '\n';
  }

  write(dir / "studies" / "desk.json",
        Json{{"network", "../desk_1.json"}, {"results_dir", "../../results/desk"}, {"seed", 1}, {"export_lp", true}});
  write(dir / "studies" / "replication.json",
        Json{{"network", "../replication_base.json"},
             {"results_dir", "../../results/replication"},
             {"seed", 1},
             {"scenarios", Json::array({Json{{"name", "base"}},
                                        Json{{"name", "wind_farms"}, {"generators", replication_records()}}})}});
  write(dir / "studies" / "nsf_surface.json",
        Json{{"network", "../congestible_dso.json"},
             {"results_dir", "../../results/nsf_surface"},
             {"seed", 1},
             {"schemes", Json::array({"ml-opf-joint"})},
             {"sweep", Json{{"fsp_size", "default"}, {"demand", "default"}}}});
  return 0;
}

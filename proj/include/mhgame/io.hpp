#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "mhgame/receivers.hpp"
#include "mhgame/scenario.hpp"

namespace mhgame {

/// A scenario together with the code book used on it.
struct Instance {
  Scenario scenario;
  CodeBook codes;
};

// JSON text: positions, next hops (-1 for the access point), gains, noise,
// seed and the chip signs. Doubles are written in shortest round-trip form,
// so a reloaded instance reproduces every run bit for bit.
void write_instance(std::ostream& out, const Scenario& scenario, const CodeBook& codes);
Instance read_instance(std::istream& in);

void save_instance(const std::filesystem::path& path, const Scenario& scenario, const CodeBook& codes);
Instance load_instance(const std::filesystem::path& path);

}  // namespace mhgame

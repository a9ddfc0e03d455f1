#include "mechlab/types.hpp"

namespace mechlab {

Context ContextSpace::at(int slot) const {
  if (slot <= 0) return {};
  return {(slot - 1) / m, (slot - 1) % m};
}

std::string ContextSpace::label(int slot) const {
  if (slot == 0) return "period1";
  Context c = at(slot);
  return "v" + std::to_string(c.buyer + 1) + "c" + std::to_string(c.seller + 1);
}

}  // namespace mechlab

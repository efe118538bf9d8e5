#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

namespace fjq {

// A concrete field component together with its derivative tags.
// internal: 0..2 or -1; spatial: 0 (time slot), 1, 2 or -1.
// tags[0] counts time derivatives, tags[1], tags[2] spatial ones.
struct Symbol {
  std::string name;
  int internal = -1;
  int spatial = -1;
  std::array<std::uint8_t, 3> tags{0, 0, 0};

  Symbol() = default;
  Symbol(std::string n, int in = -1, int sp = -1) : name(std::move(n)), internal(in), spatial(sp) {}

  auto operator<=>(const Symbol&) const = default;
  bool operator==(const Symbol&) const = default;

  int spatial_order() const { return tags[1] + tags[2]; }
  int order() const { return tags[0] + tags[1] + tags[2]; }
  bool has_tags() const { return order() != 0; }

  Symbol base() const {
    Symbol s = *this;
    s.tags = {0, 0, 0};
    return s;
  }

  Symbol derived(int dir, int times = 1) const {
    Symbol s = *this;
    s.tags[dir] = static_cast<std::uint8_t>(s.tags[dir] + times);
    return s;
  }

  bool same_base(const Symbol& o) const {
    return name == o.name && internal == o.internal && spatial == o.spatial;
  }
};

// Renders e.g. d(1,dt(e(0,2))). The innermost call carries the indices.
std::string render(const Symbol& s);

// Label naming without derivative tags, used for matrix rows and columns.
using Label = Symbol;

}  // namespace fjq

#pragma once

#include <array>

namespace mcal {

// Gauss-Legendre rules on [0, 1].
struct GaussRule {
  const double* nodes;
  const double* weights;
  int count;
};

namespace detail {
// 2-point rule, exact through cubics.
inline constexpr std::array<double, 2> kG2Nodes = {0.21132486540518711775, 0.78867513459481288225};
inline constexpr std::array<double, 2> kG2Weights = {0.5, 0.5};
// 4-point rule, exact through degree 7.
inline constexpr std::array<double, 4> kG4Nodes = {
    0.069431844202973712388, 0.33000947820757186760, 0.66999052179242813240,
    0.93056815579702628761};
inline constexpr std::array<double, 4> kG4Weights = {
    0.17392742256872692869, 0.32607257743127307131, 0.32607257743127307131,
    0.17392742256872692869};
}  // namespace detail

inline GaussRule gauss2() { return {detail::kG2Nodes.data(), detail::kG2Weights.data(), 2}; }
inline GaussRule gauss4() { return {detail::kG4Nodes.data(), detail::kG4Weights.data(), 4}; }

}  // namespace mcal

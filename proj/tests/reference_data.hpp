#pragma once

// Frozen reference fixtures shared by the unit and acceptance suites:
// a five-law reference suite indexed by corpus compressibility h, the N/D
// measurement grids, the expected parameter-vs-h regression lines, and the
// grammar suite definitions with their expected mean compressibilities.

#include <cstdint>

#include "gsc/lawfit.hpp"

namespace refdata {

struct ReferenceLaw {
  double h;
  gsc::ScalingLaw law;
};

inline constexpr ReferenceLaw kLawSuite[5] = {
    {0.12, {-0.734, 18.205, 15.803, 1.053, 1.307}},
    {0.23, {-0.262, 15.553, 13.912, 0.881, 1.064}},
    {0.32, {-1.446, 16.236, 8.829, 0.930, 0.597}},
    {0.45, {-1693.171, 15.506, 9.002, 0.882, 0.596}},
    {0.60, {1.174, 9.061, 3.525, 0.559, 0.140}},
};

// The intercept estimate of the h=0.45 law is wild; it is excluded from the
// intercept regression only (index 3 of kLawSuite).
inline constexpr std::uint64_t kInterceptOutlierIndex = 3;

inline constexpr double kNGrid[6] = {4.2e6, 8.8e6, 20.3e6, 59.0e6, 275.3e6, 1.4e9};
inline constexpr double kDGrid[6] = {1e5, 1e6, 5e6, 2e7, 5e7, 1e8};

struct LineRef {
  double slope;
  double intercept;
  double p_value;
};

inline constexpr LineRef kLineE{3.92, -1.56, 0.272};
inline constexpr LineRef kLineA{-16.20, 20.48, 0.048};
inline constexpr LineRef kLineB{-24.77, 18.73, 0.009};
inline constexpr LineRef kLineAlpha{-0.87, 1.16, 0.043};
inline constexpr LineRef kLineBeta{-2.34, 1.55, 0.008};

struct SuiteRow {
  double h;  // expected mean compressibility
  std::uint32_t num_nonterminals;
  std::uint32_t num_terminals;
  std::uint32_t max_rhs_options;
  std::uint32_t max_rhs_len;
};

// Complexity ladder: every knob grows with h.
inline constexpr SuiteRow kGrammarSuite[6] = {
    {0.11, 3, 20, 2, 2},      {0.22, 10, 150, 5, 3},    {0.35, 20, 300, 10, 5},
    {0.42, 30, 400, 10, 8},   {0.51, 50, 500, 20, 15},  {0.61, 100, 2000, 100, 30},
};

// Three grammars engineered to land in a narrow compressibility band.
inline constexpr SuiteRow kIsoGzipSuite[3] = {
    {0.32, 10, 500, 5, 10},
    {0.36, 20, 300, 10, 5},
    {0.40, 30, 200, 15, 20},
};

// Fixed vocabulary, complexity varied by the other knobs.
inline constexpr SuiteRow kIsoVocabSuite[4] = {
    {0.11, 3, 300, 2, 2},
    {0.25, 10, 300, 5, 3},
    {0.36, 20, 300, 10, 5},
    {0.47, 50, 300, 20, 10},
};

inline constexpr std::uint32_t kSuiteContextLength = 2048;
inline constexpr std::uint64_t kSuiteNumDocs = 1000;

}  // namespace refdata

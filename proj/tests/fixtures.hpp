#pragma once

#include <array>
#include <string>
#include <vector>

#include "bootseq/aligner.hpp"
#include "bootseq/syscall_trace.hpp"

namespace fixtures {

// Expected F for the worked example: test ABCDEBE on rows, reference on columns.
inline constexpr std::array<std::array<int, 11>, 8> kWorkedMatrix = {{
    {0, -8, -16, -24, -32, -40, -48, -56, -64, -72, -80},
    {-8, -2, -9, -17, -25, -33, -41, -49, -57, -65, -73},
    {-16, -10, -3, -4, -12, -20, -28, -36, -44, -52, -60},
    {-24, -18, -11, -6, -7, -15, -5, -13, -21, -29, -37},
    {-32, -14, -18, -13, -8, -9, -13, -7, -3, -11, -19},
    {-40, -22, -8, -16, -16, -9, -12, -15, -7, 3, -5},
    {-48, -30, -16, -3, -11, -11, -12, -12, -15, -5, 2},
    {-56, -38, -24, -11, -6, -12, -14, -15, -12, -9, 1},
}};

inline bootseq::Alphabet letters(const std::string& chars) {
  std::vector<std::string> names;
  for (char c : chars) names.emplace_back(1, c);
  return bootseq::build_alphabet(names);
}

inline std::vector<bootseq::Symbol> encode(const bootseq::Alphabet& a, const std::string& text) {
  std::vector<bootseq::Symbol> out;
  for (char c : text) out.push_back(c == '-' ? bootseq::kGap : a.lookup(std::string(1, c)));
  return out;
}

inline bootseq::BootSequence sequence(const std::vector<bootseq::Symbol>& symbols, const std::string& app = "app",
                                      bootseq::Label label = bootseq::Label::legitimate) {
  bootseq::BootSequence s;
  s.app_id = app;
  s.device_id = "dev";
  s.label = label;
  s.symbols = symbols;
  s.preprocessed = bootseq::is_preprocessed(symbols, 1u << 30);
  return s;
}

}  // namespace fixtures

// SPDX-License-Identifier: Apache-2.0
#include "spectra/chem/elements.hpp"

#include <array>
#include <vector>

namespace spectra::chem {
namespace {

struct ElementInfo {
  std::string_view symbol;
  double mass;
};

// IUPAC abridged standard atomic weights; mass number of the longest-lived
// isotope for elements without a standard weight.
constexpr std::array<ElementInfo, kMaxElement + 1> kElements = {{
    {"*", 0.0},       {"H", 1.008},     {"He", 4.003},    {"Li", 6.94},
    {"Be", 9.012},    {"B", 10.81},     {"C", 12.011},    {"N", 14.007},
    {"O", 15.999},    {"F", 18.998},    {"Ne", 20.180},   {"Na", 22.990},
    {"Mg", 24.305},   {"Al", 26.982},   {"Si", 28.085},   {"P", 30.974},
    {"S", 32.06},     {"Cl", 35.45},    {"Ar", 39.948},   {"K", 39.098},
    {"Ca", 40.078},   {"Sc", 44.956},   {"Ti", 47.867},   {"V", 50.942},
    {"Cr", 51.996},   {"Mn", 54.938},   {"Fe", 55.845},   {"Co", 58.933},
    {"Ni", 58.693},   {"Cu", 63.546},   {"Zn", 65.38},    {"Ga", 69.723},
    {"Ge", 72.630},   {"As", 74.922},   {"Se", 78.971},   {"Br", 79.904},
    {"Kr", 83.798},   {"Rb", 85.468},   {"Sr", 87.62},    {"Y", 88.906},
    {"Zr", 91.224},   {"Nb", 92.906},   {"Mo", 95.95},    {"Tc", 98.0},
    {"Ru", 101.07},   {"Rh", 102.906},  {"Pd", 106.42},   {"Ag", 107.868},
    {"Cd", 112.414},  {"In", 114.818},  {"Sn", 118.710},  {"Sb", 121.760},
    {"Te", 127.60},   {"I", 126.904},   {"Xe", 131.293},  {"Cs", 132.905},
    {"Ba", 137.327},  {"La", 138.905},  {"Ce", 140.116},  {"Pr", 140.908},
    {"Nd", 144.242},  {"Pm", 145.0},    {"Sm", 150.36},   {"Eu", 151.964},
    {"Gd", 157.25},   {"Tb", 158.925},  {"Dy", 162.500},  {"Ho", 164.930},
    {"Er", 167.259},  {"Tm", 168.934},  {"Yb", 173.045},  {"Lu", 174.967},
    {"Hf", 178.49},   {"Ta", 180.948},  {"W", 183.84},    {"Re", 186.207},
    {"Os", 190.23},   {"Ir", 192.217},  {"Pt", 195.084},  {"Au", 196.967},
    {"Hg", 200.592},  {"Tl", 204.38},   {"Pb", 207.2},    {"Bi", 208.980},
    {"Po", 209.0},    {"At", 210.0},    {"Rn", 222.0},    {"Fr", 223.0},
    {"Ra", 226.0},    {"Ac", 227.0},    {"Th", 232.038},  {"Pa", 231.036},
    {"U", 238.029},   {"Np", 237.0},    {"Pu", 244.0},    {"Am", 243.0},
    {"Cm", 247.0},    {"Bk", 247.0},    {"Cf", 251.0},    {"Es", 252.0},
    {"Fm", 257.0},    {"Md", 258.0},    {"No", 259.0},    {"Lr", 266.0},
    {"Rf", 267.0},    {"Db", 268.0},    {"Sg", 269.0},    {"Bh", 270.0},
    {"Hs", 269.0},    {"Mt", 278.0},    {"Ds", 281.0},    {"Rg", 282.0},
    {"Cn", 285.0},    {"Nh", 286.0},    {"Fl", 289.0},    {"Mc", 290.0},
    {"Lv", 293.0},    {"Ts", 294.0},    {"Og", 294.0},
}};

constexpr int kH = 1, kB = 5, kC = 6, kN = 7, kO = 8, kF = 9, kSi = 14,
              kP = 15, kS = 16, kCl = 17, kSe = 34, kBr = 35, kI = 53;

const std::vector<int> kNone{};
const std::vector<int> kV0{0}, kV1{1}, kV2{2}, kV3{3}, kV4{4};
const std::vector<int> kV35{3, 5}, kV246{2, 4, 6}, kV135{1, 3, 5};

const std::vector<int> *valence_list(int z, int charge) {
  switch (z) {
  case kH:
    return charge == 0 ? &kV1 : (charge == 1 || charge == -1 ? &kV0 : &kNone);
  case kB:
    return charge == 0 ? &kV3 : (charge == -1 ? &kV4 : &kNone);
  case kC:
  case kSi:
    return charge == 0 ? &kV4 : (charge == 1 || charge == -1 ? &kV3 : &kNone);
  case kN:
  case kP:
    if (charge == 0) {
      return &kV35;
    }
    if (charge == 1) {
      return &kV4;
    }
    return charge == -1 ? &kV2 : &kNone;
  case kO:
    if (charge == 0) {
      return &kV2;
    }
    if (charge == 1) {
      return &kV3;
    }
    return charge == -1 ? &kV1 : &kNone;
  case kS:
  case kSe:
    if (charge == 0) {
      return &kV246;
    }
    if (charge == 1) {
      return &kV35;
    }
    return charge == -1 ? &kV135 : &kNone;
  case kF:
  case kCl:
  case kBr:
  case kI:
    return charge == 0 ? &kV1 : (charge == -1 ? &kV0 : &kNone);
  default:
    return nullptr;
  }
}

}  // namespace

std::string_view element_symbol(int z) {
  if (z < 0 || z > kMaxElement) {
    return "?";
  }
  return kElements[z].symbol;
}

std::optional<int> element_from_symbol(std::string_view symbol) {
  for (int z = 1; z <= kMaxElement; ++z) {
    if (kElements[z].symbol == symbol) {
      return z;
    }
  }
  return std::nullopt;
}

double atomic_mass(int z) {
  if (z < 0 || z > kMaxElement) {
    return 0.0;
  }
  return kElements[z].mass;
}

std::optional<std::span<const int>> allowed_valences(int z, int charge) {
  const std::vector<int> *list = valence_list(z, charge);
  if (list == nullptr) {
    return std::nullopt;
  }
  return std::span<const int>(*list);
}

std::optional<int> target_valence(int z, int charge, int used) {
  auto allowed = allowed_valences(z, charge);
  if (!allowed) {
    return std::nullopt;
  }
  for (int v : *allowed) {
    if (v >= used) {
      return v;
    }
  }
  return std::nullopt;
}

std::optional<int> max_valence(int z, int charge) {
  auto allowed = allowed_valences(z, charge);
  if (!allowed || allowed->empty()) {
    return std::nullopt;
  }
  return allowed->back();
}

bool in_organic_subset(int z) {
  switch (z) {
  case kB:
  case kC:
  case kN:
  case kO:
  case kP:
  case kS:
  case kF:
  case kCl:
  case kBr:
  case kI:
    return true;
  default:
    return false;
  }
}

bool aromatic_capable(int z) {
  switch (z) {
  case kB:
  case kC:
  case kN:
  case kO:
  case kP:
  case kS:
  case kSe:
    return true;
  default:
    return false;
  }
}

}  // namespace spectra::chem

#include "gridgen/common.hpp"

#include <algorithm>
#include <cctype>

namespace gridgen {

const char* to_string(GenType t) {
  switch (t) {
    case GenType::nuclear: return "nuclear";
    case GenType::coal: return "coal";
    case GenType::gas_oil: return "gas_oil";
    case GenType::hydro_storage: return "hydro_storage";
    case GenType::hydro_river: return "hydro_river";
    case GenType::hydro_unspecified: return "hydro_unspecified";
    case GenType::other: return "other";
  }
  return "other";
}

GenType gen_type_from_string(const std::string& s) {
  std::string k;
  k.reserve(s.size());
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (k == "nuclear") return GenType::nuclear;
  if (k == "coal" || k == "lignite" || k == "hardcoal") return GenType::coal;
  if (k == "gasoil" || k == "gas" || k == "oil" || k == "fossilgas" ||
      k == "fossiloil")
    return GenType::gas_oil;
  if (k == "hydrostorage" || k == "hydropumpedstorage" ||
      k == "hydrowaterreservoir")
    return GenType::hydro_storage;
  if (k == "hydroriver" || k == "hydrorunofriver" ||
      k == "hydrorunofriverandpoundage" || k == "runofriver")
    return GenType::hydro_river;
  if (k == "hydrounspecified" || k == "hydro") return GenType::hydro_unspecified;
  return GenType::other;
}

}  // namespace gridgen

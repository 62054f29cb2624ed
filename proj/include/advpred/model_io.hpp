#pragma once

// Plain-text model files. Doubles are written as hexfloats so a save/load
// round trip is bit-exact. Kernel models carry their training set and its
// digest; loading fails with ParseError when the digest does not match.

#include <iosfwd>
#include <optional>
#include <string>

#include "advpred/dataset.hpp"
#include "advpred/prediction.hpp"

namespace advpred {

struct SavedModel {
  Model model;
  std::optional<Scaler> scaler;
};

void write_model(std::ostream& out, const SavedModel& saved);
SavedModel read_model(std::istream& in);

void save_model(const std::string& path, const SavedModel& saved);
SavedModel load_model(const std::string& path);

// Token form used in model files and on the command line, e.g. "abstain 0.5".
std::string format_double(double v);
double parse_double(const std::string& token);

}  // namespace advpred

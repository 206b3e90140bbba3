#pragma once

#include <string>

#include "levyot/gen_metric.hpp"
#include "levyot/levy_ot.hpp"
#include "levyot/measure.hpp"

namespace levyot {

enum class InputKind { Triplet, Measure, CoupledTriplet, Unknown };

/// Shape-based detection: triplets carry "drift"/"diffusion"/"jumps", plain
/// measures carry "atoms" of {x, w}, coupled triplets carry a "coupling".
InputKind detect_kind(const std::string& text);

// Parsers reject NaN/Inf and nonpositive weights with a field diagnostic.
LevyTriplet parse_triplet(const std::string& text);
DiscreteLevyMeasure parse_measure(const std::string& text);
LevyCoupling parse_coupling(const std::string& text);
CoupledTriplet parse_coupled_triplet(const std::string& text);

LevyTriplet load_triplet(const std::string& path);
DiscreteLevyMeasure load_measure(const std::string& path);
CoupledTriplet load_coupled_triplet(const std::string& path);
InputKind detect_file_kind(const std::string& path);

// Writers emit every floating-point number with 17 significant digits so a
// parse round trip reproduces the doubles exactly.
std::string to_json(const LevyTriplet& t);
std::string to_json(const DiscreteLevyMeasure& m);
std::string to_json(const CoupledTriplet& j);
std::string to_json(const GeneratorDistance& g);
std::string solution_to_json(const TransportSolution& sol, const DiscreteLevyMeasure& mu,
                             const DiscreteLevyMeasure& nu);

std::string format_double(double x);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace levyot

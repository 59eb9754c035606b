#pragma once

#include <string>

#include "json.hpp"
#include "leafscope/bundles.hpp"
#include "leafscope/classifier.hpp"
#include "leafscope/poisson.hpp"

namespace leafscope {

using Json = nlohmann::json;

Json spec_to_json(const CurveSpec& spec);
CurveSpec spec_from_json(const Json& j);

Json bundle_to_json(const BundleDescriptor& b);
BundleDescriptor bundle_from_json(const Json& j);

Json divisor_to_json(const Divisor& d);
Divisor divisor_from_json(const Json& j, const CurveSpec& spec);

Json label_to_json(const LeafLabel& label);
Json classification_to_json(const Classification& c);

Json form_to_json(const PolynomialForm& f);
PolynomialForm form_from_json(const Json& j);

Json cache_to_json(const PoissonCache& cache);
PoissonCache cache_from_json(const Json& j);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace leafscope

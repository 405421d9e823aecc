#pragma once

#include <string>

#include <json.hpp>

#include "torus_kam/automorphy.hpp"
#include "torus_kam/diophantine.hpp"
#include "torus_kam/instance.hpp"
#include "torus_kam/kam.hpp"

namespace torus_kam::io {

using json = nlohmann::ordered_json;

// complex scalars serialize as [re, im]; matrices as row-major nested arrays
json matrix_to_json(const Eigen::MatrixXcd& M);
Eigen::MatrixXcd matrix_from_json(const json& j);

json lattice_to_json(const Lattice& lat);
Lattice lattice_from_json(const json& j);

// {"n","d","m","Q_max","P_max","coeffs":[{"Q","P","c"}...]} sorted by (Q,P)
json series_to_json(const Series& f);
Series series_from_json(const json& j);

json system_to_json(const DeckSystem& sys);
DeckSystem system_from_json(const json& j);

json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);

json factor_to_json(const ConstantFactor& f);
ConstantFactor factor_from_json(const json& j);

ExperimentConfig config_from_json(const json& j);

json divisor_record_to_json(const DivisorRecord& rec);
json fit_to_json(const DiophantineFit& fit, bool ok);

json report_to_json(const KamReport& rep);
std::string report_to_csv(const KamReport& rep);

json read_file(const std::string& path);
void write_file(const std::string& path, const json& j);

} // namespace torus_kam::io

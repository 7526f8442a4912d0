#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "jcalc/calculus.hpp"
#include "jcalc/common.hpp"
#include "jcalc/dilation.hpp"
#include "jcalc/geometry.hpp"
#include "jcalc/operators.hpp"
#include "jcalc/rademacher.hpp"
#include "jcalc/shiftnorms.hpp"
#include "jcalc/symbols.hpp"

namespace jcalc::io {

using nlohmann::json;

json complex_to_json(Complex z);
Complex complex_from_json(const json& j);

json matrix_to_json(const ops::MatrixOperator& m);           // {"dim":n,"entries":[[re,im],...]}
ops::MatrixOperator matrix_from_json(const json& j);
std::vector<ops::MatrixOperator> matrices_from_json(const json& j);  // single or list

json domain_to_json(const sym::SpectralDomain& d);            // {"kind":...,"gamma":...}
sym::SpectralDomain domain_from_json(const json& j);

json contour_to_json(const geom::Contour& c);

json symbol_to_json(const sym::Symbol& s);
sym::Symbol symbol_from_json(const json& j);

json ritt_report_to_json(const ops::RittReport& r);
json sectorial_report_to_json(const ops::SectorialReport& r);
json calc_result_to_json(const fc::CalcResult& r);
json dilation_report_to_json(const dil::DilationReport& r);
json bracket_to_json(const shiftn::Bracket& b);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

}  // namespace jcalc::io

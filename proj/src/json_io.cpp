#include "jcalc/json_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace jcalc::io {

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

json matrix_to_json(const ops::MatrixOperator& m) {
  json entries = json::array();
  for (int i = 0; i < m.dim(); ++i)
    for (int k = 0; k < m.dim(); ++k) entries.push_back(complex_to_json(m.entries(i, k)));
  return json{{"dim", m.dim()}, {"entries", entries}};
}

ops::MatrixOperator matrix_from_json(const json& j) {
  int dim = j.at("dim").get<int>();
  const auto& entries = j.at("entries");
  if (static_cast<int>(entries.size()) != dim * dim)
    throw PreconditionError("matrix json: entries size != dim^2");
  MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) m(i, k) = complex_from_json(entries[i * dim + k]);
  return ops::MatrixOperator(std::move(m));
}

std::vector<ops::MatrixOperator> matrices_from_json(const json& j) {
  std::vector<ops::MatrixOperator> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(matrix_from_json(item));
  } else if (j.contains("matrices")) {
    for (const auto& item : j.at("matrices")) out.push_back(matrix_from_json(item));
  } else {
    out.push_back(matrix_from_json(j));
  }
  return out;
}

json domain_to_json(const sym::SpectralDomain& d) {
  return std::visit(
      [](const auto& dom) -> json {
        using T = std::decay_t<decltype(dom)>;
        if constexpr (std::is_same_v<T, geom::StolzDomain>)
          return json{{"kind", "stolz"}, {"gamma", dom.gamma}};
        else if constexpr (std::is_same_v<T, geom::Sector>)
          return json{{"kind", "sector"}, {"omega", dom.omega}};
        else if constexpr (std::is_same_v<T, geom::ShiftedStolz>)
          return json{{"kind", "shifted_stolz"}, {"gamma", dom.gamma}};
        else
          return json{{"kind", "disc_union"}, {"theta", dom.theta}};
      },
      d);
}

sym::SpectralDomain domain_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "stolz") return geom::StolzDomain(j.at("gamma").get<double>());
  if (kind == "sector") return geom::Sector(j.at("omega").get<double>());
  if (kind == "shifted_stolz") return geom::ShiftedStolz(j.at("gamma").get<double>());
  if (kind == "disc_union") return geom::DiscUnionDomain(j.at("theta").get<double>());
  throw PreconditionError("domain json: unknown kind " + kind);
}

json contour_to_json(const geom::Contour& c) {
  json pieces = json::array();
  for (const auto& p : c.pieces) {
    json pj{{"start", complex_to_json(p.start)}, {"end", complex_to_json(p.end)}};
    switch (p.kind) {
      case geom::PieceKind::Segment: pj["kind"] = "segment"; break;
      case geom::PieceKind::Arc:
        pj["kind"] = "arc";
        pj["center"] = complex_to_json(p.center);
        pj["radius"] = p.radius;
        break;
      case geom::PieceKind::LogRay:
        pj["kind"] = "log_ray";
        pj["nu"] = p.nu;
        pj["ray_sign"] = p.ray_sign;
        break;
    }
    pieces.push_back(pj);
  }
  json nodes = json::array(), weights = json::array();
  for (Complex z : c.nodes) nodes.push_back(complex_to_json(z));
  for (Complex w : c.weights) weights.push_back(complex_to_json(w));
  json out{{"pieces", pieces}, {"nodes", nodes}, {"weights", weights}};
  if (c.truncation)
    out["truncation"] = json{{"t_min", c.truncation->t_min},
                             {"t_max", c.truncation->t_max},
                             {"tail_bound", c.truncation->tail_bound}};
  return out;
}

namespace {

json poly_to_json(const sym::PolynomialData& p) {
  json coeffs = json::array();
  for (Complex c : p.coeffs) coeffs.push_back(complex_to_json(c));
  return json{{"degrees", p.degrees}, {"coeffs", coeffs}};
}

sym::PolynomialData poly_from_json(const json& j) {
  sym::PolynomialData p;
  p.degrees = j.at("degrees").get<std::vector<int>>();
  for (const auto& c : j.at("coeffs")) p.coeffs.push_back(complex_from_json(c));
  return p;
}

json expr_to_json(const sym::ExprNode& node) {
  using sym::ExprOp;
  switch (node.op) {
    case ExprOp::Const: return json{{"op", "const"}, {"value", complex_to_json(node.value)}};
    case ExprOp::Var: return json{{"op", "var"}, {"index", node.index}};
    case ExprOp::Neg: return json{{"op", "neg"}, {"args", json::array({expr_to_json(*node.a)})}};
    case ExprOp::Exp: return json{{"op", "exp"}, {"args", json::array({expr_to_json(*node.a)})}};
    case ExprOp::Pow:
      return json{{"op", "pow"},
                  {"exponent", node.exponent},
                  {"args", json::array({expr_to_json(*node.a)})}};
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div: {
      const char* name = node.op == ExprOp::Add   ? "add"
                         : node.op == ExprOp::Sub ? "sub"
                         : node.op == ExprOp::Mul ? "mul"
                                                  : "div";
      return json{{"op", name},
                  {"args", json::array({expr_to_json(*node.a), expr_to_json(*node.b)})}};
    }
  }
  throw PreconditionError("expr json: bad node");
}

sym::ExprPtr expr_from_json(const json& j) {
  using sym::ExprOp;
  auto node = std::make_shared<sym::ExprNode>();
  std::string op = j.at("op").get<std::string>();
  auto arg = [&](int i) { return expr_from_json(j.at("args").at(i)); };
  if (op == "const") {
    node->op = ExprOp::Const;
    node->value = complex_from_json(j.at("value"));
  } else if (op == "var") {
    node->op = ExprOp::Var;
    node->index = j.at("index").get<int>();
  } else if (op == "neg") {
    node->op = ExprOp::Neg;
    node->a = arg(0);
  } else if (op == "exp") {
    node->op = ExprOp::Exp;
    node->a = arg(0);
  } else if (op == "pow") {
    node->op = ExprOp::Pow;
    node->exponent = j.at("exponent").get<int>();
    node->a = arg(0);
  } else if (op == "add" || op == "sub" || op == "mul" || op == "div") {
    node->op = op == "add" ? ExprOp::Add
               : op == "sub" ? ExprOp::Sub
               : op == "mul" ? ExprOp::Mul
                             : ExprOp::Div;
    node->a = arg(0);
    node->b = arg(1);
  } else {
    throw PreconditionError("expr json: unknown op " + op);
  }
  return node;
}

json certificate_to_json(const sym::DecayCertificate& c) {
  return json{{"flavor", c.flavor == sym::DecayFlavor::SectorType ? "sector" : "stolz"},
              {"c", c.c},
              {"s", c.s}};
}

sym::DecayCertificate certificate_from_json(const json& j) {
  sym::DecayCertificate c;
  std::string flavor = j.at("flavor").get<std::string>();
  if (flavor == "sector") c.flavor = sym::DecayFlavor::SectorType;
  else if (flavor == "stolz") c.flavor = sym::DecayFlavor::StolzType;
  else throw PreconditionError("certificate json: unknown flavor " + flavor);
  c.c = j.at("c").get<double>();
  c.s = j.at("s").get<double>();
  return c;
}

}  // namespace

json symbol_to_json(const sym::Symbol& s) {
  json out;
  out["arity"] = s.arity();
  if (const auto* p = s.poly_data()) {
    out["kind"] = "polynomial";
    out.update(poly_to_json(*p));
  } else if (const auto* r = s.rational_data()) {
    out["kind"] = "rational";
    out["num"] = poly_to_json(r->num);
    json den = json::array(), poles = json::array();
    for (const auto& q : r->den) {
      json qc = json::array();
      for (Complex c : q) qc.push_back(complex_to_json(c));
      den.push_back(qc);
    }
    for (const auto& ps : r->poles) {
      json pc = json::array();
      for (Complex c : ps) pc.push_back(complex_to_json(c));
      poles.push_back(pc);
    }
    out["den"] = den;
    out["poles"] = poles;
  } else if (const auto* e = s.expr_data()) {
    out["kind"] = "closed_form";
    out["expr"] = expr_to_json(**e);
  } else {
    throw PreconditionError("symbol json: callable symbols are not serializable");
  }
  if (s.certificate()) out["certificate"] = certificate_to_json(*s.certificate());
  return out;
}

sym::Symbol symbol_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  std::optional<sym::DecayCertificate> cert;
  if (j.contains("certificate")) cert = certificate_from_json(j.at("certificate"));
  if (kind == "polynomial") return sym::Symbol::polynomial(poly_from_json(j), cert);
  if (kind == "rational") {
    sym::RationalData r;
    r.num = poly_from_json(j.at("num"));
    for (const auto& q : j.at("den")) {
      std::vector<Complex> c;
      for (const auto& v : q) c.push_back(complex_from_json(v));
      r.den.push_back(std::move(c));
    }
    if (j.contains("poles")) {
      for (const auto& ps : j.at("poles")) {
        std::vector<Complex> c;
        for (const auto& v : ps) c.push_back(complex_from_json(v));
        r.poles.push_back(std::move(c));
      }
    } else {
      for (const auto& q : r.den) r.poles.push_back(sym::polynomial_roots(q));
    }
    return sym::Symbol::rational(std::move(r), cert);
  }
  if (kind == "closed_form")
    return sym::Symbol::closed_form(j.at("arity").get<int>(), expr_from_json(j.at("expr")), cert);
  throw PreconditionError("symbol json: unknown kind " + kind);
}

json ritt_report_to_json(const ops::RittReport& r) {
  return json{{"alpha_min", r.alpha_min},
              {"alpha_at_bracket", r.alpha_at_bracket},
              {"resolvent_constant", r.resolvent_constant},
              {"far_field_bound", r.far_field_bound},
              {"power_sup", r.power_sup},
              {"diff_sup", r.diff_sup},
              {"diff_sup_half_window", r.diff_sup_half_window},
              {"diff_slope", r.diff_slope},
              {"power_window", r.power_window},
              {"samples", r.samples},
              {"spectrum_ok", r.spectrum_ok},
              {"stabilized", r.stabilized},
              {"verdict", r.verdict}};
}

json sectorial_report_to_json(const ops::SectorialReport& r) {
  return json{{"omega_min", r.omega_min},
              {"resolvent_constant", r.resolvent_constant},
              {"samples", r.samples},
              {"spectrum_ok", r.spectrum_ok},
              {"verdict", r.verdict}};
}

json calc_result_to_json(const fc::CalcResult& r) {
  return json{{"matrix", matrix_to_json(r.value)},
              {"refine_delta", r.refine_delta},
              {"angle_delta", r.angle_delta},
              {"node_counts", r.node_counts},
              {"angles_used", r.angles_used}};
}

json dilation_report_to_json(const dil::DilationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(json{{"m", c.m},
                          {"observed", c.observed},
                          {"tail", c.tail},
                          {"identity_residual", c.identity_residual},
                          {"pairing_residual", c.pairing_residual},
                          {"pass", c.pass}});
  return json{{"checks", checks}, {"numerical_floor", r.numerical_floor}, {"pass", r.pass}};
}

json bracket_to_json(const shiftn::Bracket& b) {
  return json{{"lower", b.lower}, {"upper", b.upper}};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace jcalc::io

#include "copo/serialization.hpp"

#include "copo/rng.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace copo {

namespace {

constexpr int kSchemaVersion = 1;

ordered_json matrix_to_json(const Matrix& M) {
  ordered_json arr = ordered_json::array();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
  return arr;
}

Matrix matrix_from_json(const ordered_json& arr, Index rows, Index cols, const char* what) {
  if (!arr.is_array() || static_cast<Index>(arr.size()) != rows * cols)
    throw std::runtime_error(std::string("instance file: bad shape for ") + what);
  Matrix M(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = arr[k++].get<double>();
  return M;
}

ordered_json vector_to_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const ordered_json& arr, Index size, const char* what) {
  if (!arr.is_array() || static_cast<Index>(arr.size()) != size)
    throw std::runtime_error(std::string("instance file: bad shape for ") + what);
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = arr[i].get<double>();
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (is_unbounded(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ordered_json instance_to_json(const BlockQcqpInstance& inst) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "block_qcqp_instance";
  doc["rng"] = Rng::algorithm_id();
  doc["S"] = inst.S;
  doc["n"] = inst.n;
  doc["r"] = inst.r;
  doc["A"] = matrix_to_json(inst.A);
  doc["a"] = vector_to_json(inst.a);
  ordered_json blocks = ordered_json::array();
  for (const Block& b : inst.blocks) {
    ordered_json jb;
    jb["A"] = matrix_to_json(b.A);
    jb["ball_radius"] = b.F.ball_radius;
    jb["nonneg"] = b.F.nonneg;
    ordered_json eqs = ordered_json::array();
    for (const QuadEquality& eq : b.F.quad_eqs) {
      ordered_json je;
      je["D"] = matrix_to_json(eq.D);
      je["rhs"] = eq.rhs;
      eqs.push_back(std::move(je));
    }
    jb["quad_eqs"] = std::move(eqs);
    jb["witness"] = vector_to_json(b.witness);
    blocks.push_back(std::move(jb));
  }
  doc["blocks"] = std::move(blocks);
  return doc;
}

BlockQcqpInstance instance_from_json(const ordered_json& doc) {
  if (doc.value("schema_version", -1) != kSchemaVersion)
    throw std::runtime_error("instance file: unsupported schema version");
  if (doc.value("kind", std::string()) != "block_qcqp_instance")
    throw std::runtime_error("instance file: not a block QCQP instance document");
  BlockQcqpInstance inst;
  inst.S = doc.at("S").get<Index>();
  inst.n = doc.at("n").get<Index>();
  inst.r = doc.at("r").get<double>();
  const Index N = inst.S * inst.n;
  inst.A = matrix_from_json(doc.at("A"), N, N, "A");
  inst.a = vector_from_json(doc.at("a"), N, "a");
  const ordered_json& blocks = doc.at("blocks");
  if (!blocks.is_array() || static_cast<Index>(blocks.size()) != inst.S)
    throw std::runtime_error("instance file: wrong number of blocks");
  for (const ordered_json& jb : blocks) {
    Block b;
    b.A = matrix_from_json(jb.at("A"), inst.n, inst.n, "block A");
    b.F.n = inst.n;
    b.F.ball_radius = jb.at("ball_radius").get<double>();
    b.F.nonneg = jb.at("nonneg").get<bool>();
    for (const ordered_json& je : jb.at("quad_eqs")) {
      QuadEquality eq;
      eq.D = matrix_from_json(je.at("D"), inst.n, inst.n, "equality D");
      eq.rhs = je.at("rhs").get<double>();
      b.F.quad_eqs.push_back(std::move(eq));
    }
    b.witness = vector_from_json(jb.at("witness"), inst.n, "witness");
    inst.blocks.push_back(std::move(b));
  }
  validate_instance(inst);
  return inst;
}

std::string serialize_instance(const BlockQcqpInstance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

BlockQcqpInstance parse_instance(const std::string& text) {
  return instance_from_json(ordered_json::parse(text));
}

void save_instance(const std::string& path, const BlockQcqpInstance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << serialize_instance(inst);
}

BlockQcqpInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

std::string benders_report_csv(const BendersResult& res) {
  std::ostringstream out;
  out << "k,LB,UB,gap,n_opt_cuts,n_feas_cuts,t_total_s,t_parallel_s\n";
  for (const BendersIterRow& row : res.history) {
    out << row.k << ',' << format_double(row.lb) << ',' << format_double(row.ub) << ','
        << format_double(row.gap) << ',' << row.n_opt_cuts << ',' << row.n_feas_cuts << ','
        << format_double(row.t_total_s) << ',' << format_double(row.t_parallel_s) << '\n';
  }
  return out.str();
}

ordered_json benders_report_json(const BendersResult& res) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "benders_report";
  doc["converged"] = res.converged;
  doc["lower_bound"] = format_double(res.lower_bound);
  doc["upper_bound"] = format_double(res.upper_bound);
  if (!res.note.empty()) doc["note"] = res.note;
  ordered_json iters = ordered_json::array();
  for (const BendersIterRow& row : res.history) {
    ordered_json jr;
    jr["k"] = row.k;
    jr["LB"] = format_double(row.lb);
    jr["UB"] = format_double(row.ub);
    jr["gap"] = format_double(row.gap);
    jr["n_opt_cuts"] = row.n_opt_cuts;
    jr["n_feas_cuts"] = row.n_feas_cuts;
    jr["t_total_s"] = row.t_total_s;
    jr["t_parallel_s"] = row.t_parallel_s;
    iters.push_back(std::move(jr));
  }
  doc["iterations"] = std::move(iters);
  return doc;
}

ordered_json cuts_to_json(const BlockQcqpInstance& inst,
                          const std::vector<std::vector<EnvelopeCertificate>>& opt_cuts,
                          const std::vector<std::vector<EnvelopeCertificate>>& feas_cuts) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "benders_cuts";
  doc["S"] = inst.S;
  doc["n"] = inst.n;
  auto pool_to_json = [](const std::vector<std::vector<EnvelopeCertificate>>& pools,
                         bool with_eps) {
    ordered_json out = ordered_json::array();
    for (const auto& pool : pools) {
      ordered_json jp = ordered_json::array();
      for (const EnvelopeCertificate& c : pool) {
        ordered_json jc;
        jc["alpha"] = c.alpha;
        jc["w"] = vector_to_json(c.w);
        if (with_eps) jc["epsilon"] = c.epsilon;
        jp.push_back(std::move(jc));
      }
      out.push_back(std::move(jp));
    }
    return out;
  };
  doc["opt_cuts"] = pool_to_json(opt_cuts, true);
  doc["feas_cuts"] = pool_to_json(feas_cuts, false);
  return doc;
}

std::pair<std::vector<std::vector<EnvelopeCertificate>>,
          std::vector<std::vector<EnvelopeCertificate>>>
cuts_from_json(const ordered_json& doc) {
  if (doc.value("kind", std::string()) != "benders_cuts")
    throw std::runtime_error("cuts file: not a benders_cuts document");
  const Index n = doc.at("n").get<Index>();
  auto pool_from_json = [&](const ordered_json& arr, bool with_eps, bool is_ray) {
    std::vector<std::vector<EnvelopeCertificate>> pools;
    for (const ordered_json& jp : arr) {
      std::vector<EnvelopeCertificate> pool;
      for (const ordered_json& jc : jp) {
        EnvelopeCertificate c;
        c.alpha = jc.at("alpha").get<double>();
        c.w = vector_from_json(jc.at("w"), n, "cut w");
        c.epsilon = with_eps ? jc.at("epsilon").get<double>() : 0.0;
        c.is_ray = is_ray;
        pool.push_back(std::move(c));
      }
      pools.push_back(std::move(pool));
    }
    return pools;
  };
  return {pool_from_json(doc.at("opt_cuts"), true, false),
          pool_from_json(doc.at("feas_cuts"), false, true)};
}

}  // namespace copo

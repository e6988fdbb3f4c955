#include "s3/diversity/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "s3/common/error.hpp"
#include "s3/common/hash.hpp"
#include "s3/common/text.hpp"

namespace s3::diversity {

EmbeddingSet::EmbeddingSet(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ConfigError("embedding dimension must be >= 1");
}

void EmbeddingSet::insert(std::string id, std::vector<double> v) {
  if (v.empty()) throw ConfigError("embedding '" + id + "' is empty");
  if (dim_ == 0) dim_ = v.size();
  if (v.size() != dim_) {
    throw ConfigError("embedding '" + id + "' has dimension " + std::to_string(v.size()) + ", expected " +
                      std::to_string(dim_));
  }
  vectors_.insert_or_assign(std::move(id), std::move(v));
}

const std::vector<double>* EmbeddingSet::find(std::string_view id) const {
  auto it = vectors_.find(id);
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open embeddings " + path.string());
  EmbeddingSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.insert(j.at("id").get<std::string>(), j.at("vector").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(path.string(), lineno, e.what());
    } catch (const ConfigError& e) {
      throw RecordError(path.string(), lineno, e.what());
    }
  }
  return out;
}

void save_embeddings(const EmbeddingSet& e, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& [id, v] : e.entries()) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["vector"] = v;
    out << j.dump() << '\n';
  }
}

std::vector<double> hashed_embedding(std::string_view s, std::size_t dim) {
  if (dim == 0) throw ConfigError("embedding dimension must be >= 1");
  std::vector<double> v(dim, 0.0);
  for (const auto& tok : text::word_tokens(s)) {
    const auto h = fnv1a64(tok);
    v[h % dim] += (h >> 63) ? -1.0 : 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::string_view analysis_text(const Example& e) {
  if (const auto* t = std::get_if<TextLabel>(&e.payload)) return t->x;
  if (const auto* p = std::get_if<PairLabel>(&e.payload)) return p->x;
  return std::get<ContextQA>(e.payload).question;
}

EmbeddingSet embed(const Dataset& d, std::size_t dim) {
  EmbeddingSet out(dim);
  for (const auto& e : d) out.insert(e.id, hashed_embedding(analysis_text(e), dim));
  return out;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ConfigError("cosine_similarity: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()) + ")");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw ConfigError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::size_t edit_distance(std::string_view a_utf8, std::string_view b_utf8) {
  const auto a = text::utf8_decode(a_utf8);
  const auto b = text::utf8_decode(b_utf8);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

nlohmann::ordered_json DiversityReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_pairs"] = n_pairs;
  j["avg_cos_sim"] = avg_cos_sim;
  j["avg_edit_dist"] = avg_edit_dist;
  j["avg_len_mis"] = avg_len_mis;
  j["avg_len_add"] = avg_len_add;
  return j;
}

std::string DiversityReport::to_csv() const {
  std::ostringstream os;
  os << "add_id,mis_id,cos_sim,edit_dist,len_mis,len_add\n";
  os.precision(10);
  for (const auto& p : pairs) {
    os << p.add_id << ',' << p.mis_id << ',' << p.cos_sim << ',' << p.edit_dist << ',' << p.len_mis << ','
       << p.len_add << '\n';
  }
  return os.str();
}

DiversityReport quality_report(const Dataset& mis, const Dataset& add, const EmbeddingSet& emb) {
  DiversityReport r;
  auto vec = [&](const std::string& id) {
    const auto* v = emb.find(id);
    if (!v) throw ConfigError("no embedding for example '" + id + "'");
    return std::span<const double>(*v);
  };
  for (const auto& a : add) {
    const auto& src = a.provenance.source_error_id;
    if (!src) throw ConfigError("add example '" + a.id + "' has no source_error_id");
    const Example* m = mis.find(*src);
    if (!m) throw ConfigError("add example '" + a.id + "' links to unknown error '" + *src + "'");
    PairQuality q;
    q.add_id = a.id;
    q.mis_id = m->id;
    q.cos_sim = cosine_similarity(vec(m->id), vec(a.id));
    q.edit_dist = edit_distance(analysis_text(*m), analysis_text(a));
    q.len_mis = text::utf8_length(analysis_text(*m));
    q.len_add = text::utf8_length(analysis_text(a));
    r.pairs.push_back(std::move(q));
  }
  r.n_pairs = r.pairs.size();
  if (r.n_pairs == 0) return r;
  for (const auto& q : r.pairs) {
    r.avg_cos_sim += q.cos_sim;
    r.avg_edit_dist += static_cast<double>(q.edit_dist);
    r.avg_len_mis += static_cast<double>(q.len_mis);
    r.avg_len_add += static_cast<double>(q.len_add);
  }
  const double n = static_cast<double>(r.n_pairs);
  r.avg_cos_sim /= n;
  r.avg_edit_dist /= n;
  r.avg_len_mis /= n;
  r.avg_len_add /= n;
  return r;
}

Projection project_pca(const EmbeddingSet& emb) {
  if (emb.dim() < 2) throw ConfigError("PCA projection needs embedding dimension >= 2");
  const auto n = static_cast<Eigen::Index>(emb.size());
  const auto d = static_cast<Eigen::Index>(emb.dim());
  Projection out;
  if (n == 0) return out;
  Eigen::MatrixXd m(n, d);
  Eigen::Index row = 0;
  for (const auto& [id, v] : emb.entries()) {
    m.row(row++) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), d);
  }
  m.rowwise() -= m.colwise().mean();
  const Eigen::MatrixXd cov = (m.transpose() * m) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw InvariantError("PCA eigen-decomposition failed");
  // Eigenvalues ascend; the last two columns are the leading axes.
  Eigen::MatrixXd axes(d, 2);
  axes.col(0) = solver.eigenvectors().col(d - 1);
  axes.col(1) = solver.eigenvectors().col(d - 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    axes.col(c).cwiseAbs().maxCoeff(&arg);
    if (axes(arg, c) < 0) axes.col(c) *= -1.0;
  }
  const Eigen::MatrixXd proj = m * axes;
  row = 0;
  for (const auto& [id, v] : emb.entries()) {
    out[id] = Point2{proj(row, 0), proj(row, 1)};
    ++row;
  }
  return out;
}

Projection load_coords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open coordinates " + path.string());
  Projection out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out[j.at("id").get<std::string>()] = Point2{j.at("x").get<double>(), j.at("y").get<double>()};
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(path.string(), lineno, e.what());
    }
  }
  return out;
}

void save_coords(const Projection& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& [id, pt] : p) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["x"] = pt.x;
    j["y"] = pt.y;
    out << j.dump() << '\n';
  }
}

Projection project_external(const EmbeddingSet& emb, const Projection& coords) {
  Projection out;
  for (const auto& [id, v] : emb.entries()) {
    auto it = coords.find(id);
    if (it == coords.end()) throw ConfigError("external coordinates lack id '" + id + "'");
    out[id] = it->second;
  }
  return out;
}

std::vector<Point2> points_of(const Projection& p) {
  std::vector<Point2> out;
  out.reserve(p.size());
  for (const auto& [id, pt] : p) out.push_back(pt);
  return out;
}

double coverage_rate(std::span<const Point2> gold, std::span<const Point2> syn, double gamma) {
  if (!(gamma >= 0.0)) throw ConfigError("coverage radius must be >= 0");
  if (syn.empty()) throw ConfigError("coverage_rate needs at least one synthesized point");
  if (gold.empty()) return 0.0;
  std::vector<Point2> sorted(syn.begin(), syn.end());
  std::sort(sorted.begin(), sorted.end(), [](const Point2& a, const Point2& b) { return a.x < b.x; });
  const double g2 = gamma * gamma;
  // The x-window is padded so rounding can only add candidates; the squared test decides.
  const double pad = gamma * 1e-9 + 1e-300;
  std::size_t covered = 0;
  for (const auto& g : gold) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), g.x - gamma - pad,
                               [](const Point2& p, double x) { return p.x < x; });
    for (; it != sorted.end() && it->x <= g.x + gamma + pad; ++it) {
      const double dx = it->x - g.x, dy = it->y - g.y;
      if (dx * dx + dy * dy <= g2) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(gold.size());
}

double default_gamma(std::span<const Point2> gold) {
  if (gold.size() < 2) throw ConfigError("default gamma needs at least two gold points");
  std::vector<double> nn(gold.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t j = i + 1; j < gold.size(); ++j) {
      const double d = std::hypot(gold[i].x - gold[j].x, gold[i].y - gold[j].y);
      nn[i] = std::min(nn[i], d);
      nn[j] = std::min(nn[j], d);
    }
  }
  std::sort(nn.begin(), nn.end());
  const std::size_t mid = nn.size() / 2;
  return nn.size() % 2 ? nn[mid] : 0.5 * (nn[mid - 1] + nn[mid]);
}

}  // namespace s3::diversity

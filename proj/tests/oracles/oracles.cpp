#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace oracle {

Mat pearson(const Mat& series) {
  const int n = static_cast<int>(series.rows());
  const int t = static_cast<int>(series.cols());
  std::vector<long double> mean(n, 0.0L), sd(n, 0.0L);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < t; ++k) mean[i] += series(i, k);
    mean[i] /= t;
    long double v = 0.0L;
    for (int k = 0; k < t; ++k) v += (series(i, k) - mean[i]) * (series(i, k) - mean[i]);
    sd[i] = std::sqrt(v / (t - 1));
  }
  Mat r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      long double cov = 0.0L;
      for (int k = 0; k < t; ++k) cov += (series(i, k) - mean[i]) * (series(j, k) - mean[j]);
      cov /= (t - 1);
      r(i, j) = static_cast<double>(cov / (sd[i] * sd[j]));
    }
  }
  return r;
}

Mat mask_then_scale(const Mat& raw, double tau) {
  Mat out = Mat::Zero(raw.rows(), raw.cols());
  double peak = 0.0;
  for (int i = 0; i < raw.rows(); ++i) {
    for (int j = 0; j < raw.cols(); ++j) {
      if (i != j && !(raw(i, j) < tau)) {
        out(i, j) = raw(i, j);
        peak = std::max(peak, raw(i, j));
      }
    }
  }
  if (peak > 0.0) out /= peak;
  else out.setZero();
  return out;
}

Mat sum_then_scale(const Mat& a, const Mat& b) {
  Mat out(a.rows(), a.cols());
  double peak = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out(i, j) = std::max(0.0, a(i, j) + b(i, j));
      peak = std::max(peak, out(i, j));
    }
  }
  if (peak > 0.0) out /= peak;
  return out;
}

double cosine(const Mat& a_f, const Mat& a_d, int i, int j) {
  double dot = 0.0, nf = 0.0, nd = 0.0;
  for (int k = 0; k < a_f.cols(); ++k) nf += a_f(i, k) * a_f(i, k);
  for (int k = 0; k < a_d.cols(); ++k) nd += a_d(j, k) * a_d(j, k);
  if (nf == 0.0 || nd == 0.0) return 0.0;
  for (int k = 0; k < a_f.cols(); ++k) dot += a_f(i, k) * a_d(j, k);
  return std::max(0.0, dot / (std::sqrt(nf) * std::sqrt(nd)));
}

Mat topk_similarity(const Mat& a_f, const Mat& a_d, int k) {
  const int n = static_cast<int>(a_f.rows());
  Mat sim(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) sim(i, j) = cosine(a_f, a_d, i, j);
  }
  Mat out = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int ahead = 0;
      for (int m = 0; m < n; ++m) {
        if (sim(i, m) > sim(i, j) || (sim(i, m) == sim(i, j) && m < j)) ++ahead;
      }
      if (ahead < k) out(i, j) = sim(i, j);
    }
  }
  return out;
}

Mat shared_triangles(const Mat& a_f, const Mat& a_d) {
  const int n = static_cast<int>(a_f.rows());
  auto edge = [&](int x, int y) { return a_f(x, y) > 0.0 && a_d(x, y) > 0.0; };
  Mat out = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int l = j + 1; l < n; ++l) {
        if (edge(i, j) && edge(j, i) && edge(j, l) && edge(l, j) && edge(i, l) && edge(l, i)) {
          out(i, j) = out(j, i) = 1.0;
          out(j, l) = out(l, j) = 1.0;
          out(i, l) = out(l, i) = 1.0;
        }
      }
    }
  }
  return out;
}

Mat block_assemble(const Mat& a_f, const Mat& a_d, const Mat& a_fd) {
  const int nf = static_cast<int>(a_f.rows());
  const int nd = static_cast<int>(a_d.rows());
  Mat out(nf + nd, nf + nd);
  for (int r = 0; r < nf + nd; ++r) {
    for (int c = 0; c < nf + nd; ++c) {
      if (r < nf && c < nf) out(r, c) = a_f(r, c);
      else if (r < nf) out(r, c) = a_fd(r, c - nf);
      else if (c < nf) out(r, c) = a_fd(c, r - nf);
      else out(r, c) = a_d(r - nf, c - nf);
    }
  }
  return out;
}

Mat dense_product(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      long double s = 0.0L;
      for (int k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<double>(s);
    }
  }
  return out;
}

std::vector<Mat> slice_windows(const Mat& series, int width, int stride) {
  std::vector<Mat> out;
  for (int start = 0; start + width <= series.cols(); start += stride) {
    Mat w(series.rows(), width);
    for (int r = 0; r < series.rows(); ++r) {
      for (int c = 0; c < width; ++c) w(r, c) = series(r, start + c);
    }
    out.push_back(w);
  }
  return out;
}

std::array<int, 3> triple_census(const std::vector<Binary>& windows, int i, int j) {
  const int n = static_cast<int>(windows.front().rows());
  auto everywhere = [&](int x, int y) {
    for (const Binary& w : windows) {
      if (w(x, y) == 0) return false;
    }
    return true;
  };
  std::array<int, 3> f{0, 0, 0};
  if (i == j || !everywhere(i, j)) return f;
  for (int k = 0; k < n; ++k) {
    if (k == i || k == j) continue;
    const int present = 1 + (everywhere(j, k) ? 1 : 0) + (everywhere(k, i) ? 1 : 0);
    ++f[present - 1];
  }
  return f;
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] != 1) continue;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (labels[q] != 0) continue;
      ++pairs;
      if (scores[p] > scores[q]) wins += 1.0;
      else if (scores[p] == scores[q]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

Confusion confusion(const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pos = !(scores[i] < threshold);
    if (labels[i] == 1 && pos) ++c.tp;
    if (labels[i] == 1 && !pos) ++c.fn;
    if (labels[i] == 0 && pos) ++c.fp;
    if (labels[i] == 0 && !pos) ++c.tn;
  }
  return c;
}

Mat finite_difference(const std::function<double(const Mat&)>& f, const Mat& x, double step) {
  Mat g(x.rows(), x.cols());
  Mat probe = x;
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      probe(r, c) = x(r, c) + step;
      const double up = f(probe);
      probe(r, c) = x(r, c) - step;
      const double down = f(probe);
      probe(r, c) = x(r, c);
      g(r, c) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, long> joint;
  std::map<int, long> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ra[a[i]];
    ++rb[b[i]];
  }
  auto c2 = [](long x) { return static_cast<double>(x) * (x - 1) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [k, v] : joint) index += c2(v);
  for (const auto& [k, v] : ra) sa += c2(v);
  for (const auto& [k, v] : rb) sb += c2(v);
  const double total = c2(static_cast<long>(a.size()));
  const double expected = sa * sb / total;
  const double maximum = (sa + sb) / 2.0;
  if (maximum == expected) return 0.0;
  return (index - expected) / (maximum - expected);
}

Deviation deviation(const Mat& main, const Mat& reference) {
  Deviation d;
  for (int r = 0; r < main.rows(); ++r) {
    for (int c = 0; c < main.cols(); ++c) {
      const double abs = std::abs(main(r, c) - reference(r, c));
      const double scale = std::max({std::abs(main(r, c)), std::abs(reference(r, c)), 1e-12});
      d.max_abs = std::max(d.max_abs, abs);
      d.max_rel = std::max(d.max_rel, abs / scale);
    }
  }
  return d;
}

}  // namespace oracle

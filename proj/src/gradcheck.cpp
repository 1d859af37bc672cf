#include <cmath>
#include <cstdio>
#include <functional>

#include "modnav/ad/nn.hpp"
#include "modnav/checks/checks.hpp"
#include "modnav/policy/factory.hpp"

namespace modnav::checks {

namespace {

using ad::Param;
using ad::Tape;
using ad::Tensor;
using P = Param<double>;

constexpr double kStep = 1e-5;
constexpr double kRelTol = 1e-4;
constexpr double kAbsFloor = 1e-6;

bool close(double analytic, double fd, double& rel_err) {
  const double diff = std::abs(analytic - fd);
  const double scale = std::max(std::abs(analytic), std::abs(fd));
  rel_err = diff / std::max(scale, 1e-30);
  return diff <= std::max(kAbsFloor, kRelTol * scale);
}

void fill_uniform(P& p, Rng& rng, double lo, double hi) {
  for (double& v : p.value) v = rng.uniform(lo, hi);
}

// Compares tape gradients of `build` to central differences for the listed
// coordinates (all coordinates when `coords_per_param` <= 0).
CheckResult fd_check(const std::string& name, std::vector<P*> params,
                     const std::function<Tensor<double>(Tape<double>&)>& build,
                     Rng& rng, int coords_per_param = 0) {
  CheckResult res;
  res.name = name;

  ad::zero_grads(params);
  {
    Tape<double> tp;
    tp.backward(build(tp));
  }

  auto eval = [&] {
    Tape<double> tp;
    return build(tp).scalar();
  };

  res.pass = true;
  for (P* p : params) {
    std::vector<int64_t> coords;
    if (coords_per_param <= 0 || coords_per_param >= p->size()) {
      coords.resize(p->size());
      for (int64_t i = 0; i < p->size(); ++i) coords[i] = i;
    } else {
      for (int c = 0; c < coords_per_param; ++c)
        coords.push_back(rng.uniform_int(0, int(p->size() - 1)));
    }
    for (int64_t i : coords) {
      const double saved = p->value[i];
      p->value[i] = saved + kStep;
      const double up = eval();
      p->value[i] = saved - kStep;
      const double down = eval();
      p->value[i] = saved;
      const double fd = (up - down) / (2.0 * kStep);
      double rel = 0.0;
      if (!close(p->grad[i], fd, rel)) {
        res.pass = false;
        if (res.detail.empty()) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "%s[%lld]: analytic %.8g vs fd %.8g",
                        p->name.c_str(), (long long)i, p->grad[i], fd);
          res.detail = buf;
        }
      }
      res.worst = std::max(res.worst, rel);
    }
  }
  return res;
}

// Vector outputs are projected to a scalar with fixed random weights drawn
// before the check, so every FD evaluation sees the same loss.
std::vector<CheckResult> primitive_checks(Rng& rng) {
  std::vector<CheckResult> out;

  {
    P x("x", {3, 4}), w("w", {5, 4}), b("b", {5}), proj("proj", {3, 5});
    fill_uniform(x, rng, -1, 1);
    fill_uniform(w, rng, -1, 1);
    fill_uniform(b, rng, -1, 1);
    fill_uniform(proj, rng, -1, 1);
    out.push_back(fd_check("dense", {&x, &w, &b}, [&](Tape<double>& tp) {
      return tp.sum(tp.mul(tp.dense(tp.leaf(x), tp.leaf(w), tp.leaf(b)),
                           tp.leaf(proj)));
    }, rng));
  }
  {
    P x("x", {2, 4}), m("m", {4, 3}), proj("proj", {2, 3});
    fill_uniform(x, rng, -1, 1);
    fill_uniform(m, rng, -1, 1);
    fill_uniform(proj, rng, -1, 1);
    out.push_back(fd_check("matmul", {&x, &m}, [&](Tape<double>& tp) {
      return tp.sum(tp.mul(tp.matmul(tp.leaf(x), tp.leaf(m)), tp.leaf(proj)));
    }, rng));
  }
  {
    P a("a", {2, 5}), b("b", {2, 5});
    fill_uniform(a, rng, -2, 2);
    fill_uniform(b, rng, -2, 2);
    out.push_back(fd_check("add_sub_mul", {&a, &b}, [&](Tape<double>& tp) {
      auto s = tp.add(tp.leaf(a), tp.leaf(b));
      auto d = tp.sub(tp.leaf(a), tp.leaf(b));
      return tp.sum(tp.add(tp.mul(s, d), tp.scale(tp.leaf(a), 0.3)));
    }, rng));
  }
  {
    P x("x", {2, 6});
    fill_uniform(x, rng, -2, 2);
    for (double& v : x.value)  // keep clear of relu/abs kinks
      if (std::abs(v) < 0.05) v = 0.1;
    out.push_back(fd_check("tanh_relu_sigmoid", {&x}, [&](Tape<double>& tp) {
      auto t = tp.tanh(tp.leaf(x));
      auto r = tp.relu(tp.leaf(x));
      auto s = tp.sigmoid(tp.leaf(x));
      return tp.sum(tp.add(tp.add(t, r), s));
    }, rng));
    out.push_back(fd_check("abs", {&x}, [&](Tape<double>& tp) {
      return tp.sum(tp.abs(tp.leaf(x)));
    }, rng));
    out.push_back(fd_check("exp", {&x}, [&](Tape<double>& tp) {
      return tp.sum(tp.exp(tp.scale(tp.leaf(x), 0.5)));
    }, rng));
  }
  {
    P x("x", {1, 5});
    fill_uniform(x, rng, 0.5, 3.0);
    out.push_back(fd_check("log", {&x}, [&](Tape<double>& tp) {
      return tp.sum(tp.log(tp.leaf(x)));
    }, rng));
  }
  {
    P x("x", {3, 8}), g("gain", {8}), o("offset", {8}), proj("proj", {3, 8});
    fill_uniform(x, rng, -2, 2);
    fill_uniform(g, rng, 0.5, 1.5);
    fill_uniform(o, rng, -0.5, 0.5);
    fill_uniform(proj, rng, -1, 1);
    out.push_back(fd_check("layer_norm", {&x, &g, &o}, [&](Tape<double>& tp) {
      return tp.sum(tp.mul(
          tp.layer_norm(tp.leaf(x), tp.leaf(g), tp.leaf(o)), tp.leaf(proj)));
    }, rng));
  }
  {
    P x("x", {2, 10}), proj("proj", {2, 10});
    fill_uniform(x, rng, -1, 1);
    fill_uniform(proj, rng, -1, 1);
    out.push_back(
        fd_check("top_k_sparsify", {&x}, [&](Tape<double>& tp) {
          return tp.sum(tp.mul(
              tp.top_k_sparsify(tp.relu(tp.leaf(x)), 3), tp.leaf(proj)));
        }, rng));
  }
  {
    P x("x", {3, 6}), proj("proj", {3, 6});
    fill_uniform(x, rng, -2, 2);
    fill_uniform(proj, rng, -1, 1);
    out.push_back(fd_check("softmax", {&x}, [&](Tape<double>& tp) {
      return tp.sum(tp.mul(tp.softmax(tp.leaf(x)), tp.leaf(proj)));
    }, rng));
    out.push_back(
        fd_check("categorical_entropy", {&x}, [&](Tape<double>& tp) {
          return tp.sum(tp.categorical_entropy(tp.softmax(tp.leaf(x))));
        }, rng));
  }
  {
    P x("x", {2, 5});
    fill_uniform(x, rng, -2, 2);
    for (double& v : x.value)  // stay away from the clip boundaries
      if (std::abs(std::abs(v) - 1.0) < 0.05) v *= 1.2;
    out.push_back(fd_check("clip", {&x}, [&](Tape<double>& tp) {
      return tp.sum(tp.clip(tp.leaf(x), -1.0, 1.0));
    }, rng));
  }
  {
    P a("a", {2, 5}), b("b", {2, 5});
    fill_uniform(a, rng, -2, 2);
    fill_uniform(b, rng, -2, 2);
    for (int64_t i = 0; i < a.size(); ++i)  // avoid FD across the min kink
      if (std::abs(a.value[i] - b.value[i]) < 0.05) b.value[i] += 0.1;
    out.push_back(fd_check("minimum", {&a, &b}, [&](Tape<double>& tp) {
      return tp.sum(tp.minimum(tp.leaf(a), tp.leaf(b)));
    }, rng));
  }
  {
    P a("a", {2, 3}), b("b", {2, 4}), proj("proj", {2, 7});
    fill_uniform(a, rng, -1, 1);
    fill_uniform(b, rng, -1, 1);
    fill_uniform(proj, rng, -1, 1);
    out.push_back(
        fd_check("concat_slice", {&a, &b}, [&](Tape<double>& tp) {
          auto cat = tp.concat({tp.leaf(a), tp.leaf(b)});
          auto left = tp.slice_cols(cat, 0, 2);
          auto right = tp.slice_cols(cat, 2, 5);
          return tp.add(tp.sum(tp.mul(cat, tp.leaf(proj))),
                        tp.add(tp.sum(left), tp.sum(tp.mul(right, right))));
        }, rng));
  }
  {
    P s("s", {3}), x("x", {3, 4});
    fill_uniform(s, rng, -1, 1);
    fill_uniform(x, rng, -1, 1);
    out.push_back(fd_check("scale_rows", {&s, &x}, [&](Tape<double>& tp) {
      auto y = tp.scale_rows(tp.leaf(s), tp.leaf(x));
      return tp.sum(tp.mul(y, y));
    }, rng));
  }
  {
    P mu("mean", {3, 2}), ls("log_std", {2});
    fill_uniform(mu, rng, -1, 1);
    fill_uniform(ls, rng, -0.5, 0.5);
    std::vector<double> acts(6);
    for (double& a : acts) a = rng.uniform(-1.5, 1.5);
    out.push_back(
        fd_check("gaussian_log_prob", {&mu, &ls}, [&, acts](Tape<double>& tp) {
          auto a = tp.constant(acts, {3, 2});
          return tp.sum(tp.gaussian_log_prob(tp.leaf(mu), tp.leaf(ls), a));
        }, rng));
  }
  {
    ad::GruCell<double> cell("gru", 4, 3);
    P x("x", {2, 4}), h("h", {2, 3}), proj("proj", {2, 3});
    std::vector<P*> params = {&x, &h, &proj};
    std::vector<P*> cell_params;
    cell.collect(cell_params);
    Rng init_rng(rng.next());
    for (P* p : cell_params) fill_uniform(*p, init_rng, -0.7, 0.7);
    fill_uniform(x, rng, -1, 1);
    fill_uniform(h, rng, -1, 1);
    fill_uniform(proj, rng, -1, 1);
    std::vector<P*> all = params;
    all.insert(all.end(), cell_params.begin(), cell_params.end());
    out.push_back(fd_check("gru_cell", all, [&](Tape<double>& tp) {
      auto h1 = cell(tp, tp.leaf(x), tp.leaf(h));
      auto h2 = cell(tp, tp.leaf(x), h1);  // chained through time
      return tp.sum(tp.mul(h2, tp.leaf(proj)));
    }, rng));
  }
  return out;
}

CheckResult policy_check(policy::Arch kind, uint64_t seed, Rng& rng) {
  const auto spec = policy::ArchitectureSpec::make(kind);
  auto pol = policy::make_policy<double>(spec, seed);
  auto params = pol->parameters();
  const bool modular = kind == policy::Arch::Insect;

  constexpr int kSteps = 3;
  std::vector<double> obs(kSteps * sim::kObsDim), acts(kSteps * 2);
  for (double& v : obs) v = rng.uniform(-1.5, 1.5);
  for (double& v : acts) v = rng.uniform(-1.0, 1.0);
  const policy::StateBatch init = pol->initial_state(1);

  auto build = [&](Tape<double>& tp) {
    auto st = pol->inject_state(tp, init);
    Tensor<double> loss;
    for (int t = 0; t < kSteps; ++t) {
      auto obs_t = tp.constant(
          std::span(obs).subspan(size_t(t) * sim::kObsDim, sim::kObsDim),
          {1, sim::kObsDim});
      auto ps = pol->step(tp, obs_t, st);
      auto act_t =
          tp.constant(std::span(acts).subspan(size_t(t) * 2, 2), {1, 2});
      auto term = tp.add(
          tp.sum(tp.gaussian_log_prob(ps.mean, ps.log_std, act_t)),
          tp.scale(tp.sum(ps.value), 0.5));
      if (modular) {
        term = tp.add(term, tp.sum(tp.categorical_entropy(ps.mode_probs)));
        term = tp.add(term,
                      tp.sum(tp.categorical_entropy(ps.arbiter_weights)));
        term = tp.add(
            term, tp.scale(tp.sum(tp.mul(ps.command, ps.command)), 0.1));
      }
      loss = loss.ok() ? tp.add(loss, term) : term;
      st = ps.next_state;
    }
    return loss;
  };

  return fd_check(std::string(policy::arch_name(kind)) + "_policy_3step",
                  params, build, rng, /*coords_per_param=*/4);
}

}  // namespace

std::vector<CheckResult> gradient_checks(uint64_t seed) {
  Rng rng(derive_seed(seed, 0xadc0de));
  std::vector<CheckResult> out = primitive_checks(rng);
  out.push_back(policy_check(policy::Arch::Insect, derive_seed(seed, 11), rng));
  out.push_back(
      policy_check(policy::Arch::CentralizedGru, derive_seed(seed, 12), rng));
  out.push_back(
      policy_check(policy::Arch::CentralizedMlp, derive_seed(seed, 13), rng));
  return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results)
    if (!r.pass) return false;
  return true;
}

std::string render_report(const std::vector<CheckResult>& results) {
  std::string out;
  for (const CheckResult& r : results) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "[%s] %-28s worst rel err %.3g %s\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.worst,
                  r.detail.c_str());
    out += buf;
  }
  return out;
}

}  // namespace modnav::checks

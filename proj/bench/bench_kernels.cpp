// Serial vs OpenMP component sums for the JD objective.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "racr/jd.hpp"
#include "racr/rng.hpp"

namespace {

using namespace racr;
using Clock = std::chrono::steady_clock;

template <class F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  fmt::print("threads: {} (openmp {})\n", jd::kernels::max_threads(),
             jd::kernels::openmp_available() ? "on" : "off");
  fmt::print("{:>6} {:>4} {:>4} {:>6} {:>12} {:>12} {:>8} {:>10}\n", "n", "d", "r", "kernel", "serial_ms", "omp_ms",
             "speedup", "rel_diff");

  struct Size {
    std::size_t n;
    Eigen::Index d, r;
  };
  for (Size s : {Size{500, 5, 5}, Size{2015, 5, 5}, Size{500, 10, 10}, Size{10000, 10, 5}, Size{4000, 43, 20}}) {
    const auto inst = jd::generate(s.n, s.d, s.r, 7, 0.02);
    const Stiefel St(s.d, s.r);
    const Matrix U = St.random_point(11).data();
    auto eng = rng::stream(13, 0, "random_tangent");
    const Matrix xi = St.project(ManifoldPoint(U), rng::gaussian(eng, s.d, s.r)).data();
    std::vector<ComponentIndex> all(s.n);
    std::iota(all.begin(), all.end(), ComponentIndex{0});

    auto row = [&](const char* name, auto serial, auto omp, double diff) {
      const double ts = best_ms(reps, serial);
      const double tp = best_ms(reps, omp);
      fmt::print("{:>6} {:>4} {:>4} {:>6} {:>12.3f} {:>12.3f} {:>8.2f} {:>10.2e}\n", s.n, s.d, s.r, name, ts, tp,
                 ts / tp, diff);
    };

    double vs = 0, vp = 0;
    auto vser = [&] { vs = jd::kernels::value_sum_serial(inst, U, all); };
    auto vomp = [&] { vp = jd::kernels::value_sum_omp(inst, U, all); };
    vser();
    vomp();
    row("value", vser, vomp, std::abs(vs - vp) / std::abs(vs));
    Matrix gs, gp, hs, hp;
    auto gser = [&] { gs = jd::kernels::egrad_sum_serial(inst, U, all); };
    auto gomp = [&] { gp = jd::kernels::egrad_sum_omp(inst, U, all); };
    gser();
    gomp();
    row("egrad", gser, gomp, (gs - gp).norm() / gs.norm());
    auto hser = [&] { hs = jd::kernels::ehess_sum_serial(inst, U, xi, all); };
    auto homp = [&] { hp = jd::kernels::ehess_sum_omp(inst, U, xi, all); };
    hser();
    homp();
    row("ehess", hser, homp, (hs - hp).norm() / hs.norm());
  }
  return 0;
}

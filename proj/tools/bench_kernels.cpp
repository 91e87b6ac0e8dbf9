// Times the serial reference kernels against the OpenMP variants on shapes
// representative of the encoder's first block. Run with FREQBOOT_NUM_THREADS
// set to compare thread counts.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "freqboot/kernels.hpp"
#include "freqboot/rng.hpp"
#include "freqboot/tensor.hpp"

using namespace freqboot;
using kernels::Exec;

namespace {

Tensor<float> random_tensor(std::vector<long> shape, rng::Stream& rs) {
  Tensor<float> t(std::move(shape));
  for (long i = 0; i < t.size(); ++i) t[i] = static_cast<float>(2.0 * rs.uniform() - 1.0);
  return t;
}

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const std::string& name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n", name.c_str(),
              serial_ms, parallel_ms, parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 5;
  if (argc > 1) reps = std::atoi(argv[1]);
  if (reps < 1) reps = 1;

  std::printf("threads: %d, reps per measurement: %d\n", kernels::max_threads(), reps);

  rng::Stream rs(rng::mix(2024, "bench"));
  const long B = 128, Cin = 9, Cout = 32, T = 128, K = 25, dil = 1;
  const long padL = (K - 1) / 2, padR = (K - 1) - padL;
  const long Tout = T + padL + padR - dil * (K - 1);

  auto x = random_tensor({B, Cin, T}, rs);
  auto w = random_tensor({Cout, Cin, K}, rs);
  auto bias = random_tensor({Cout}, rs);
  Tensor<float> y({B, Cout, Tout});
  report("conv1d_forward",
         time_ms([&] {
           kernels::conv1d_forward(x.data(), B, Cin, T, w.data(), bias.data(), Cout, K, dil, padL,
                                   y.data(), Tout, Exec::serial);
         }, reps),
         time_ms([&] {
           kernels::conv1d_forward(x.data(), B, Cin, T, w.data(), bias.data(), Cout, K, dil, padL,
                                   y.data(), Tout, Exec::parallel);
         }, reps));

  auto dy = random_tensor({B, Cout, Tout}, rs);
  Tensor<float> dx({B, Cin, T});
  report("conv1d_backward_input",
         time_ms([&] {
           kernels::conv1d_backward_input(dy.data(), B, Cout, Tout, w.data(), Cin, K, dil, padL,
                                          dx.data(), T, Exec::serial);
         }, reps),
         time_ms([&] {
           kernels::conv1d_backward_input(dy.data(), B, Cout, Tout, w.data(), Cin, K, dil, padL,
                                          dx.data(), T, Exec::parallel);
         }, reps));

  Tensor<float> dw({Cout, Cin, K}), db({Cout});
  report("conv1d_backward_params",
         time_ms([&] {
           dw.zero();
           db.zero();
           kernels::conv1d_backward_params(dy.data(), B, Cout, Tout, x.data(), Cin, T, K, dil,
                                           padL, dw.data(), db.data(), Exec::serial);
         }, reps),
         time_ms([&] {
           dw.zero();
           db.zero();
           kernels::conv1d_backward_params(dy.data(), B, Cout, Tout, x.data(), Cin, T, K, dil,
                                           padL, dw.data(), db.data(), Exec::parallel);
         }, reps));

  const long In = 128 * 16, Out = 256;
  auto xl = random_tensor({B, In}, rs);
  auto wl = random_tensor({Out, In}, rs);
  auto bl = random_tensor({Out}, rs);
  Tensor<float> yl({B, Out});
  report("linear_forward",
         time_ms([&] {
           kernels::linear_forward(xl.data(), B, In, wl.data(), bl.data(), Out, yl.data(),
                                   Exec::serial);
         }, reps),
         time_ms([&] {
           kernels::linear_forward(xl.data(), B, In, wl.data(), bl.data(), Out, yl.data(),
                                   Exec::parallel);
         }, reps));

  auto dyl = random_tensor({B, Out}, rs);
  Tensor<float> dwl({Out, In}), dbl({Out});
  report("linear_backward_params",
         time_ms([&] {
           dwl.zero();
           dbl.zero();
           kernels::linear_backward_params(dyl.data(), B, Out, xl.data(), In, dwl.data(),
                                           dbl.data(), Exec::serial);
         }, reps),
         time_ms([&] {
           dwl.zero();
           dbl.zero();
           kernels::linear_backward_params(dyl.data(), B, Out, xl.data(), In, dwl.data(),
                                           dbl.data(), Exec::parallel);
         }, reps));

  Tensor<float> mean({Cout}), var({Cout});
  report("channel_stats",
         time_ms([&] {
           kernels::channel_stats(y.data(), B, Cout, Tout, mean.data(), var.data(), Exec::serial);
         }, reps),
         time_ms([&] {
           kernels::channel_stats(y.data(), B, Cout, Tout, mean.data(), var.data(),
                                  Exec::parallel);
         }, reps));

  return 0;
}

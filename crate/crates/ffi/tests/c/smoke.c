#include <math.h>
#include <stdio.h>
#include "dplrf.h"

#define CHECK(call)                                                            \
  do {                                                                         \
    DplrfStatus st_ = (call);                                                  \
    if (st_ != DPLRF_STATUS_OK) {                                              \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_, dplrf_last_error());  \
      return 1;                                                                \
    }                                                                          \
  } while (0)

int main(void) {
  DplrfConfig cfg = dplrf_config_default(16, 16, 2);
  cfg.t = 4;
  cfg.v = 16;
  DplrfSpectral *st = NULL;
  CHECK(dplrf_spectral_new(&cfg, &st));
  size_t i[3] = {0, 1, 2};
  double s[3] = {6.0, 3.0, 1.0};
  CHECK(dplrf_spectral_update_batch(st, i, i, s, 3));
  DplrfFactorization *f = NULL;
  CHECK(dplrf_spectral_finalize(st, &f));
  double sigma[2];
  CHECK(dplrf_factorization_sigma(f, sigma, 2));
  printf("%.6f %.6f\n", sigma[0], sigma[1]);
  if (fabs(sigma[0] - 6.0) > 1e-6 || fabs(sigma[1] - 3.0) > 1e-6) return 2;
  if (dplrf_spectral_update(st, 99, 0, 1.0) != DPLRF_STATUS_INDEX_OUT_OF_RANGE) return 3;
  dplrf_factorization_free(f);
  dplrf_spectral_free(st);
  return 0;
}

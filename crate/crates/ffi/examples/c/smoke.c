/* Build after `cargo build -p expertkm-ffi`:
 *   cc -I crates/ffi/include crates/ffi/examples/c/smoke.c \
 *      target/debug/libexpertkm_ffi.a -lm -lpthread -ldl -o smoke && ./smoke
 */
#include <stdio.h>

#include "expertkm.h"

int main(void) {
    const double w[] = {1.0, 2.0, 3.0, 4.0};
    const uint8_t delta[] = {1, 0, 1, 1};
    const double eta[] = {1.0, 0.0, 0.0, 1.0};
    EkmSample *sample = NULL;
    EkmCurve *curve = NULL;
    EkmFit fit;
    const double t[] = {0.5, 1.0, 3.0, 4.0};
    double f[4];

    if (ekm_sample_new(w, delta, eta, NULL, 4, &sample) != EKM_STATUS_OK) {
        fprintf(stderr, "sample: %s\n", ekm_last_error_message());
        return 1;
    }
    if (ekm_estimate(sample, EKM_ESTIMATOR_CRUDE, &curve) != EKM_STATUS_OK) {
        fprintf(stderr, "estimate: %s\n", ekm_last_error_message());
        return 1;
    }
    ekm_curve_eval(curve, t, 4, f);
    for (int i = 0; i < 4; i++) {
        printf("F(%g) = %.17g\n", t[i], f[i]);
    }
    if (ekm_fit(sample, EKM_MODEL_EXPONENTIAL, 0.0, EKM_MODE_CRUDE, 0, &fit) == EKM_STATUS_OK) {
        printf("lambda = %.17g (mass %.17g)\n", fit.estimate, fit.weight_mass);
    }
    if (ekm_fit(sample, EKM_MODEL_PARETO, -1.0, EKM_MODE_CRUDE, 0, &fit) != EKM_STATUS_OK) {
        printf("expected failure: %s\n", ekm_last_error_message());
    }
    printf("version %s\n", ekm_version());
    ekm_curve_free(curve);
    ekm_sample_free(sample);
    return 0;
}

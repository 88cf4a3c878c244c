/* Minimal C consumer: prints the SU(2) level-2 genus-2 Verlinde number
   and the first coefficients of its adjoint-deformed index. */
#include <stdio.h>
#include "verlinde.h"

int main(void) {
    VerlindeGroup *group = NULL;
    VerlindeLevel *level = NULL;
    VerlindeSeries *series = NULL;
    double value = 0.0, re = 0.0, im = 0.0;
    const int64_t adjoint[1] = {2};

    if (verlinde_group_new("A1", &group) != VERLINDE_STATUS_OK ||
        verlinde_level_new_scalar(group, 2, &level) != VERLINDE_STATUS_OK ||
        verlinde_number(group, level, 2, &value) != VERLINDE_STATUS_OK) {
        fprintf(stderr, "error: %s\n", verlinde_last_error_message());
        return 1;
    }
    printf("verlinde %.0f\n", value);

    if (verlinde_index_even(group, level, 2, adjoint, NULL, 2, &series) != VERLINDE_STATUS_OK) {
        fprintf(stderr, "error: %s\n", verlinde_last_error_message());
        return 1;
    }
    for (uint32_t n = 0; n <= 2; n++) {
        verlinde_series_coefficient(series, n, &re, &im);
        printf("t^%u %.6f\n", n, re);
    }
    if (verlinde_number(group, NULL, 2, &value) != VERLINDE_STATUS_NULL_POINTER) {
        return 1;
    }
    printf("null %s\n", verlinde_last_error_message());

    verlinde_series_free(series);
    verlinde_level_free(level);
    verlinde_group_free(group);
    return 0;
}

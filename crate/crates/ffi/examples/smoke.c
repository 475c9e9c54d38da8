#include <stdio.h>
#include "dp_laplace.h"

int main(void) {
    DplProfile *g = NULL;
    if (dpl_profile_gaussian(0.5, &g) != DPL_STATUS_OK) {
        fprintf(stderr, "%s\n", dpl_last_error_message());
        return 1;
    }
    double eps = 0.0;
    dpl_profile_eps_for_delta(g, 1e-6, -1.0, 20.0, &eps);
    printf("gaussian kappa=0.5: eps(1e-6) = %.6f\n", eps);
    dpl_profile_free(g);
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ldp_osc.h"

int main(void) {
    LdpMethod *m = NULL;
    if (ldp_method_from_selector("midpoint", &m) != LDP_STATUS_OK) {
        return 1;
    }
    LdpParams p = {1.0, 0.0, 0.0};
    LdpRate r;
    if (ldp_rate(m, 0.2, LDP_OBSERVABLE_MEAN_POSITION, &p, &r) != LDP_STATUS_OK) {
        return 2;
    }
    if (!r.applicable || fabs(r.modified_coefficient - 1.0 / 3.0) > 1e-12) {
        return 3;
    }
    LdpLaw law;
    if (ldp_law(m, 0.1, 100, LDP_STATISTIC_MEAN_VELOCITY, &p, &law) != LDP_STATUS_OK || law.variance <= 0.0) {
        return 4;
    }
    ldp_method_free(m);
    if (ldp_method_from_selector("nope", &m) != LDP_STATUS_UNKNOWN_METHOD) {
        return 5;
    }
    if (strstr(ldp_last_error_message(), "nope") == NULL) {
        return 6;
    }
    printf("%s ok\n", ldp_version());
    return 0;
}

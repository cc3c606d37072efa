#include <stdio.h>

#include "errinject.h"

int main(void) {
    EiDhTable *dh = ei_dh_default();
    double q[6] = {0.2, -0.1, 0.12, 0.3, -0.3, 0.1};
    double pose[16];
    int rc = ei_forward_kinematics(dh, q, pose);
    if (rc != EI_OK) {
        char msg[256];
        ei_last_error_message(msg, sizeof msg);
        fprintf(stderr, "error %d: %s\n", rc, msg);
    } else {
        printf("%.12f %.12f %.12f\n", pose[3], pose[7], pose[11]);
    }
    ei_dh_free(dh);
    return rc;
}

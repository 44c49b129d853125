#include <stdio.h>
#include <string.h>

#include "yieldnet.h"

int main(int argc, char **argv) {
    if (argc != 2) {
        return 64;
    }
    double x[] = {0.0, 1.0, 2.0, 3.0};
    double y[] = {10.0, 20.0, 30.0, 40.0};
    YnModel *m = NULL;
    if (yn_grnn_fit(x, 4, 1, y, 1e-6, &m) != YN_STATUS_OK) {
        return 1;
    }
    if (yn_model_kind(m) != YN_KIND_GRNN || yn_model_dim(m) != 1) {
        return 2;
    }
    double q = 2.0, p = 0.0;
    if (yn_model_predict(m, &q, 1, &p) != YN_STATUS_OK || p != 30.0) {
        return 3;
    }
    if (yn_model_save(m, argv[1]) != YN_STATUS_OK) {
        return 4;
    }
    yn_model_free(m);

    YnModel *back = NULL;
    if (yn_model_load(argv[1], &back) != YN_STATUS_OK) {
        return 5;
    }
    double qs[] = {0.0, 3.0};
    double ps[2];
    if (yn_model_predict_batch(back, qs, 2, 1, ps) != YN_STATUS_OK || ps[0] != 10.0 || ps[1] != 40.0) {
        return 6;
    }
    double bad[] = {1.0, 2.0};
    if (yn_model_predict(back, bad, 2, &p) != YN_STATUS_DIMENSION) {
        return 7;
    }
    if (yn_last_error_message() == NULL || strstr(yn_last_error_message(), "dimension") == NULL) {
        return 8;
    }
    yn_model_free(back);
    printf("ok %s\n", yn_version());
    return 0;
}

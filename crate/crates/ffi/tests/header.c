#include "fracheat.h"

int smoke(void) {
    FhFunction *f = NULL;
    double v[8] = {0, 1, 0, -1, 0, 1, 0, -1};
    if (fh_function_from_samples(1, 8, v, 8, &f) != FH_STATUS_OK) {
        return 1;
    }
    double heat = 0.0, diff = 0.0;
    FhStatus st = fh_lambda_s_seminorms(f, 2.0, 1, 0.5, 2, 4, &heat, &diff);
    fh_function_free(f);
    char *doc = NULL;
    if (fh_run_json("kernel", "", &doc) == FH_STATUS_OK) {
        fh_string_free(doc);
    }
    return st == FH_STATUS_OK ? 0 : (int)st;
}

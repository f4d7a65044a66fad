#include <stdio.h>
#include <string.h>
#include "commlab.h"

#define CHECK(cond)                                                     \
    do {                                                                \
        if (!(cond)) {                                                  \
            const char *e = commlab_last_error();                       \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,      \
                    e ? e : "no error");                                \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(void) {
    CommlabFunction *f = NULL;
    CHECK(commlab_function_new(COMMLAB_FUNCTION_KIND_XOR, 2, 2, &f) == COMMLAB_STATUS_OK);
    CommlabCover cover;
    CHECK(commlab_cover_number(f, true, 10.0, &cover) == COMMLAB_STATUS_OK);
    CHECK(cover.lower == 16 && cover.upper == 16);
    commlab_function_free(f);

    CommlabInstance *inst = NULL;
    CHECK(commlab_instance_from_json("{\"schema\": 1}", &inst) == COMMLAB_STATUS_INVALID_INPUT);
    CHECK(inst == NULL && commlab_last_error() != NULL);

    CommlabBatchSummary sum;
    CHECK(commlab_verify_batch(COMMLAB_SUITE_MAIN, COMMLAB_GENERATOR_PARTITION, 2, 4, 1, 0, 9,
                               COMMLAB_RHO_MODE_GLOBAL, 1e-9, &sum) == COMMLAB_STATUS_OK);
    CHECK(sum.rows == 10 && sum.violations == 0);
    printf("ok %s\n", commlab_version());
    return 0;
}

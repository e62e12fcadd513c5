#include <math.h>
#include <stdio.h>
#include <string.h>

#include "punctext.h"

#define CHECK(cond)                                            \
    do {                                                       \
        if (!(cond)) {                                         \
            fprintf(stderr, "line %d: %s\n", __LINE__, #cond); \
            return 1;                                          \
        }                                                      \
    } while (0)

int main(void) {
    PtxEngine *e = NULL;
    CHECK(ptx_engine_new(NULL, 12, 64, 11.0 / 12.0, 0, &e) == PTX_STATUS_OK);

    char *payload = NULL;
    uint32_t idx[4];
    size_t count = 0;
    bool tail = false;
    CHECK(ptx_puncture(e, "caramel cake", -1, &payload, idx, 4, &count, &tail) == PTX_STATUS_OK);
    CHECK(strlen(payload) == 11);

    char *marked = NULL;
    CHECK(ptx_indicate(e, payload, idx, count, tail, &marked) == PTX_STATUS_OK);
    char *restored = NULL;
    CHECK(ptx_recover(e, marked, &restored) == PTX_STATUS_OK);
    CHECK(strcmp(restored, "caramel cake") == 0);

    PtxTrial t;
    CHECK(ptx_transmit(e, "caramel cake", INFINITY, 0.0, 0, &t, NULL) == PTX_STATUS_OK);
    CHECK(t.status == 0 && t.bleu >= 0.0);

    CHECK(ptx_engine_new(NULL, 40, 64, 2.0, 0, &e) == PTX_STATUS_INVALID_ARGUMENT);
    char *err = ptx_last_error_message();
    CHECK(err != NULL && strlen(err) > 0);

    printf("%s %s\n", payload, restored);
    ptx_string_free(err);
    ptx_string_free(payload);
    ptx_string_free(marked);
    ptx_string_free(restored);
    ptx_engine_free(e);
    return 0;
}

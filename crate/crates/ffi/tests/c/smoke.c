#include <stdio.h>
#include <string.h>

#include "fulfillment.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        ff_status s_ = (call);                                             \
        if (s_ != FF_STATUS_OK) {                                          \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,              \
                    ff_last_error() ? ff_last_error() : "(none)");        \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    const char *header =
        "{\"n\":2,\"K\":1,\"fixed_costs\":[4.0,1.0],\"cost_regime\":\"time-varying\","
        "\"inventory\":[1,0]}";
    ff_session *session = NULL;
    CHECK(ff_session_open(header, "pure-greedy", 1, &session));

    int64_t order[2] = {1, 1};
    double costs[4] = {1.0, 1.0, 1.0, 1.0};
    int64_t plan[4];
    double cost = 0.0;
    bool gated = false;
    CHECK(ff_session_decide(session, order, 2, costs, 4, plan, 4, &cost, &gated));
    if (plan[0] + plan[2] != 1 || plan[1] + plan[3] != 1 || plan[3] != 0) {
        fprintf(stderr, "unexpected plan %lld %lld %lld %lld\n", (long long)plan[0], (long long)plan[1],
                (long long)plan[2], (long long)plan[3]);
        return 1;
    }

    int64_t bad[2] = {-1, 0};
    if (ff_session_decide(session, bad, 2, costs, 4, plan, 4, NULL, NULL) != FF_STATUS_BAD_ORDER) {
        fprintf(stderr, "negative order accepted\n");
        return 1;
    }

    size_t periods = 0;
    double total = 0.0;
    CHECK(ff_session_state(session, &periods, &total));
    ff_session_free(session);
    if (periods != 1 || total != cost) {
        fprintf(stderr, "state mismatch\n");
        return 1;
    }

    ff_service *svc = NULL;
    char *reply = NULL;
    CHECK(ff_service_new(NULL, &svc));
    CHECK(ff_service_handle(svc, "{\"v\":1,\"op\":\"state\",\"session\":\"missing\"}", &reply));
    int ok = strstr(reply, "no_session") != NULL;
    ff_string_free(reply);
    ff_service_free(svc);
    if (!ok) {
        fprintf(stderr, "expected no_session\n");
        return 1;
    }
    printf("ok %.3f\n", total);
    return 0;
}

#ifndef CODEDQ_H
#define CODEDQ_H

/* C interface to the coded multi-access queueing toolkit.
 * All returned strings are heap-allocated JSON documents owned by the
 * caller; release them with cq_string_free. Functions return CQ_OK on
 * success; on failure the output pointer is set to NULL and a message is
 * available from cq_last_error until the next call on the same thread. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cq_status {
    CQ_OK = 0,
    CQ_ERR_INTERNAL = 1,
    CQ_ERR_CONFIG = 2,
    CQ_ERR_INFEASIBLE = 3  /* infeasible rates or simulation went unstable */
} cq_status;

const char* cq_version(void);

/* Last error message for the calling thread; never NULL. */
const char* cq_last_error(void);

void cq_string_free(char* s);

/* ---- experiment execution ------------------------------------------- */

/* config_json must carry a "command" key (capacity, regime, route,
 * simulate). overrides_json may be NULL/empty or an object with optional
 * keys seed, departures, replications. Artifacts are written under
 * out_dir; *out_json receives a summary document. */
cq_status cq_run_config(const char* config_json, const char* overrides_json,
                        const char* out_dir, char** out_json);

/* Runs a named built-in preset through cq_run_config. */
cq_status cq_run_preset(const char* name, const char* overrides_json,
                        const char* out_dir, char** out_json);

/* JSON array of built-in preset names. */
cq_status cq_preset_names(char** out_json);

/* Full config JSON of a named preset. */
cq_status cq_preset_get(const char* name, char** out_json);

/* ---- system handles --------------------------------------------------- */

typedef struct cq_system cq_system;

/* json: {"n":int,"k":int,"n_coded":int,"alpha":[...]} */
cq_status cq_system_create(const char* json, cq_system** out);
void cq_system_destroy(cq_system* system);
cq_status cq_system_to_json(const cq_system* system, char** out_json);

/* lambda must hold k rates. Verdict documents: capacity membership
 * {"uncoded":{"verdict","margin"},"coded":{...}} (use_lp selects the LP
 * oracle for the coded test) and the traffic-regime label. */
cq_status cq_capacity_membership(const cq_system* system, const double* lambda,
                                 size_t k, int use_lp, char** out_json);
cq_status cq_classify_regime(const cq_system* system, const double* lambda,
                             size_t k, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* CODEDQ_H */

/* C interface to the CNSM core: opaque handles, integer status codes,
 * heap strings released with cnsm_string_free. All functions return
 * CNSM_OK on success; on failure cnsm_last_error() describes the fault
 * for the calling thread. */
#ifndef CNSM_H
#define CNSM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    CNSM_OK = 0,
    CNSM_ERR_IO = 1,
    CNSM_ERR_PARSE = 2,
    CNSM_ERR_CONFLICT = 3,
    CNSM_ERR_PRECONDITION = 4,
    CNSM_ERR_DOMAIN = 5,
    CNSM_ERR_CONVERGENCE = 6,
    CNSM_ERR_INTERNAL = 7
} cnsm_status;

/* Gate verdicts reported by cnsm_evaluate. */
typedef enum {
    CNSM_GATE_ACCEPT = 0,
    CNSM_GATE_FALLBACK_PHASE2 = 1,
    CNSM_GATE_FALLBACK_PHASE1 = 2
} cnsm_gate;

const char* cnsm_version(void);
const char* cnsm_last_error(void);
void cnsm_string_free(char* s);

/* ---- opaque handles ---- */

typedef struct cnsm_table cnsm_table;
typedef struct cnsm_model cnsm_model;
typedef struct cnsm_kb cnsm_kb;

cnsm_status cnsm_table_read_csv(const char* path, cnsm_table** out);
cnsm_status cnsm_table_write_csv(const cnsm_table* table, const char* path);
size_t cnsm_table_rows(const cnsm_table* table);
size_t cnsm_table_cols(const cnsm_table* table);
void cnsm_table_free(cnsm_table* table);

cnsm_status cnsm_model_load(const char* path, cnsm_model** out);
cnsm_status cnsm_model_predict(const cnsm_model* model, const double* row, size_t n,
                               double* out);
cnsm_status cnsm_model_kind(const cnsm_model* model, char** out);
void cnsm_model_free(cnsm_model* model);

cnsm_status cnsm_kb_open(const char* root, cnsm_kb** out);
cnsm_status cnsm_kb_put_dataset_csv(cnsm_kb* kb, const char* csv_path, const char* id,
                                    const char* kind, const char* scenario,
                                    const char* parent_id);
size_t cnsm_kb_dataset_count(const cnsm_kb* kb);
void cnsm_kb_free(cnsm_kb* kb);

cnsm_status cnsm_sha256_file(const char* path, char** hex_out);

/* ---- pipeline steps ----
 * String outputs are JSON unless noted; pass NULL to skip an output. */

/* config_json NULL selects the bundled five-scenario default; seed
 * overrides the config seed. */
cnsm_status cnsm_generate(const char* config_json, uint64_t seed, const char* observed_csv,
                          const char* truth_csv, char** summary_json);

cnsm_status cnsm_ingest_jsonl(const char* jsonl_path, const char* out_csv,
                              char** summary_json);

/* Relative timestamps, static-field pruning, range repair and spike
 * repair on the target column. */
cnsm_status cnsm_preprocess(const char* in_csv, const char* out_csv, char** report_json);

/* exclusions: comma-separated column names, may be NULL. Writes the
 * selected feature set (with normalization parameters) as JSON. */
cnsm_status cnsm_build_features(const char* in_csv, const char* target, int k,
                                const char* exclusions, const char* feature_set_out,
                                char** summary_json);

/* kind: lasso | elasticnet | forest | gbt. Validation tail per scenario
 * of size (1 - train_fraction). */
cnsm_status cnsm_train(const char* in_csv, const char* feature_set_path, const char* kind,
                       uint64_t seed, double train_fraction, const char* model_out,
                       char** metrics_json);

/* model_paths / model_names: comma-separated, same arity. profile:
 * comma-separated runtime field names, NULL to skip the availability
 * gate. */
cnsm_status cnsm_evaluate(const char* in_csv, const char* feature_set_path,
                          const char* model_paths, const char* model_names,
                          double train_fraction, const char* profile, char** report_json,
                          char** report_text, int* gate_out);

/* model_paths: the four component models, comma-separated. */
cnsm_status cnsm_combine(const char* in_csv, const char* feature_set_path,
                         const char* model_paths, int step, double train_fraction,
                         const char* model_out, char** summary_json);

/* points file: JSON array of equal-length vectors. */
cnsm_status cnsm_anomaly_fit(const char* points_json_path, int k, uint64_t seed,
                             const char* model_out, char** summary_json);

/* input JSON: {"history": [r...], "current": r, "threshold": t}. */
cnsm_status cnsm_anomaly_score(const char* input_json_path, char** score_json);

/* env_json_path NULL selects the default environment. controller:
 * proactive | reactive. window_ticks 0 keeps the default. Writes
 * ledger.json and events.jsonl under out_dir when given. */
cnsm_status cnsm_run_pcs(const char* env_json_path, const char* model_path,
                         const char* feature_set_path, const char* controller,
                         int64_t ticks, uint64_t seed, int64_t window_ticks,
                         const char* kb_root, const char* out_dir, char** report_json);

/* Text table of stored model metrics. */
cnsm_status cnsm_report(const char* kb_root, char** text_out);

#ifdef __cplusplus
}
#endif

#endif

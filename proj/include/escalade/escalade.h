/*
 * Copyright 2026 The Escalade Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the escalade escalation-prediction engine.
 *
 * Every call returns an esc_status; on failure esc_last_error() holds a
 * message for the calling thread. Strings returned through char** out
 * parameters are owned by the caller and released with esc_string_free().
 * Options are passed as JSON objects; missing keys take their defaults.
 */

#ifndef ESCALADE_ESCALADE_H_
#define ESCALADE_ESCALADE_H_

#include <stddef.h>

#if defined(_WIN32)
#define ESC_API __declspec(dllexport)
#else
#define ESC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum esc_status {
  ESC_OK = 0,
  ESC_ERR_USAGE = 1,
  ESC_ERR_VALIDATION = 2,
  ESC_ERR_RUNTIME = 3,
  ESC_ERR_NOT_FOUND = 4,
  ESC_ERR_STATE = 5
} esc_status;

typedef struct esc_corpus esc_corpus;
typedef struct esc_model esc_model;
typedef struct esc_service esc_service;

ESC_API const char* esc_version(void);
ESC_API const char* esc_last_error(void);
ESC_API const char* esc_status_name(esc_status status);
ESC_API void esc_string_free(char* s);

/* Synthetic corpus generation. config_json follows the generator config file
 * schema. summary_json may be NULL. */
ESC_API esc_status esc_generate(const char* config_json, const char* events_path,
                                const char* crits_path, char** summary_json);
ESC_API esc_status esc_generator_describe(const char* config_json, char** text);

/* crits_path may be NULL or empty for a corpus without escalations. */
ESC_API esc_status esc_corpus_load(const char* events_path,
                                   const char* crits_path, esc_corpus** out);
ESC_API esc_status esc_corpus_filter_cascades(const esc_corpus* corpus,
                                              esc_corpus** out);
/* Counts of events, tickets, customers, records and escalation types. */
ESC_API esc_status esc_corpus_summary(const esc_corpus* corpus, char** json);
ESC_API void esc_corpus_free(esc_corpus* corpus);

/* Feature CSV: training rows, or every snapshot when all_snapshots != 0. */
ESC_API esc_status esc_extract_csv(const esc_corpus* corpus, int window_months,
                                   int all_snapshots, const char* out_path);

/* Keys: n_trees, max_depth (null = unlimited), min_samples_split,
 * features_per_split, seed, balance, bootstrap, threads, window_months. */
ESC_API esc_status esc_train(const esc_corpus* corpus, const char* config_json,
                             esc_model** out);
ESC_API esc_status esc_model_save(const esc_model* model, const char* path);
ESC_API esc_status esc_model_load(const char* path, esc_model** out);
ESC_API esc_status esc_model_info(const esc_model* model, char** json);
ESC_API int esc_model_window_months(const esc_model* model);
/* features must hold exactly n == 22 values in the fixed feature order. */
ESC_API esc_status esc_model_predict(const esc_model* model,
                                     const double* features, size_t n, int* er,
                                     int* predicted_crit, double* confidence);
ESC_API void esc_model_free(esc_model* model);

/* Keys: k, seed, window_months, per_snapshot, train (train config object).
 * report_json receives the metrics report. */
ESC_API esc_status esc_evaluate(const esc_corpus* corpus,
                                const char* options_json, char** report_json);
/* CSV of ticket_id,upto_seq,er,predicted_crit,confidence at each ticket's
 * latest snapshot. */
ESC_API esc_status esc_score_csv(const esc_model* model,
                                 const esc_corpus* corpus, int window_months,
                                 const char* out_path);
/* CSV of upto_seq,er, one row per snapshot. */
ESC_API esc_status esc_timeline_csv(const esc_model* model,
                                    const esc_corpus* corpus,
                                    const char* ticket_id, int window_months,
                                    char** csv);

/* Keys: host, port (0 = any free port), model_path, journal_path,
 * window_months, history_events, history_crits. Serves on a background
 * thread. */
ESC_API esc_status esc_service_start(const char* options_json,
                                     esc_service** out);
ESC_API int esc_service_port(const esc_service* service);
/* Blocks until esc_service_stop() is called from another thread. */
ESC_API void esc_service_wait(esc_service* service);
ESC_API void esc_service_stop(esc_service* service);
ESC_API void esc_service_free(esc_service* service);

#ifdef __cplusplus
}
#endif

#endif /* ESCALADE_ESCALADE_H_ */

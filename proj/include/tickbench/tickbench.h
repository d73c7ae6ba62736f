#ifndef TICKBENCH_TICKBENCH_H
#define TICKBENCH_TICKBENCH_H

/* C interface of the tickbench toolkit. Strings returned through `char**`
 * out parameters are owned by the caller and released with tb_free_string.
 * On a non-OK status, tb_last_error() describes the failure for the calling
 * thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TB_API __declspec(dllexport)
#else
#define TB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tb_status {
  TB_OK = 0,
  TB_INVALID_ARGUMENT = 1,
  TB_NOT_FOUND = 2,
  TB_INVALID_DATA = 3,
  TB_IO = 4,
  TB_CONFIG = 5,
  TB_SCHEMA_MISMATCH = 6,
  TB_QUERY = 7,
  TB_UNSUPPORTED = 8,
  TB_CONNECTION = 9,
  TB_ALREADY_EXISTS = 10,
  TB_INTERNAL = 11
} tb_status;

typedef enum tb_table { TB_TABLE_TRADES = 0, TB_TABLE_BOOKS = 1 } tb_table;

TB_API const char* tb_status_name(tb_status status);
TB_API const char* tb_last_error(void);
TB_API void tb_free_string(char* s);
TB_API const char* tb_version(void);

/* Benchmark catalogue, in table order. Returned strings are static. */
TB_API size_t tb_benchmark_count(void);
TB_API const char* tb_benchmark_name(size_t index);
TB_API const char* tb_benchmark_description(size_t index);
TB_API const char* tb_benchmark_category(size_t index);
TB_API int tb_benchmark_is_query(size_t index);

/* ---------------------------------------------------------------- datagen */

typedef struct tb_generate_options {
  uint64_t seed;
  const char* day; /* YYYY-MM-DD */
  uint64_t trades_rows;
  uint64_t book_rows;
  int exchanges;
  const char* out_dir;
} tb_generate_options;

TB_API void tb_generate_options_init(tb_generate_options* options);
/* Writes trades.csv and books.csv; `out_json` receives one JSON line per
 * file with its row count, size and SHA-256. */
TB_API tb_status tb_generate(const tb_generate_options* options, char** out_json);

/* ----------------------------------------------------------------- engine */

typedef struct tb_engine tb_engine;

/* `compression` is "none", "all" or a comma separated column list; NULL
 * means none. */
TB_API tb_status tb_engine_open(const char* root, const char* compression, tb_engine** out);
TB_API void tb_engine_close(tb_engine* engine);
/* `out_json` receives the ingest report. */
TB_API tb_status tb_engine_ingest_csv(tb_engine* engine, const char* path, char** out_json);
TB_API tb_status tb_engine_export_csv(tb_engine* engine, tb_table table, const char* path, uint64_t* out_rows);
TB_API tb_status tb_engine_row_count(tb_engine* engine, tb_table table, uint64_t* out_rows);
TB_API tb_status tb_engine_storage_report(tb_engine* engine, tb_table table, uint64_t source_file_bytes,
                                          double* out_percent);
/* Runs one query benchmark with the catalogue parameters anchored at `day`
 * (NULL for the default) and returns the canonical tab-separated result. */
TB_API tb_status tb_engine_execute(tb_engine* engine, const char* benchmark, const char* day, char** out_tsv);

/* ---------------------------------------------------------------- toolkit */

/* Backend configuration plus the embedded store directory. */
typedef struct tb_toolkit tb_toolkit;

/* `config_path` may be NULL; TICKBENCH_CONFIG is consulted then. */
TB_API tb_status tb_toolkit_open(const char* config_path, const char* store_dir, tb_toolkit** out);
TB_API void tb_toolkit_close(tb_toolkit* toolkit);
/* Comma separated configured backend ids. */
TB_API tb_status tb_toolkit_backends(tb_toolkit* toolkit, char** out_ids);

/* Ingests <data_dir>/trades.csv and <data_dir>/books.csv into empty tables.
 * `out_json` receives the ingest result and, when supported, the storage
 * report as two JSON lines. */
TB_API tb_status tb_ingest(tb_toolkit* toolkit, const char* backend_id, const char* data_dir, char** out_json);

typedef struct tb_run_options {
  const char* plan_path;      /* INI plan; the fields below override it when set */
  const char* backend_id;     /* default "embedded" */
  const char* reference_id;   /* default "embedded" */
  const char* benchmarks;     /* "all" or comma separated ids */
  int repetitions;            /* 0 = plan or default (10) */
  const char* cache_clear_command;
  int warm_up;                /* -1 = plan or default (off) */
  const char* day;            /* anchor day YYYY-MM-DD */
  const char* symbol;
  int hourly_tv2;             /* -1 = plan or default (daily) */
  const char* out_path;       /* JSON report file; may be NULL */
} tb_run_options;

TB_API void tb_run_options_init(tb_run_options* options);
/* Writes the JSON report to out_path when set. `out_json` receives one JSON
 * line per result, then W and SE lines when the backend recorded its
 * ingest. `out_exit_code` is 0 when all results are consistent, 2 on a
 * consistency failure and 1 on an operational error. */
TB_API tb_status tb_run(tb_toolkit* toolkit, const tb_run_options* options, char** out_json, int* out_exit_code);

/* Runs every selected query benchmark once on each backend and compares.
 * `out_json` receives one JSON line per benchmark. */
TB_API tb_status tb_verify(tb_toolkit* toolkit, const tb_run_options* options, char** out_json, int* out_exit_code);

/* `format` is csv, plotdata or json. `out_json` receives a JSON line listing
 * the files written. */
TB_API tb_status tb_report(const char* in_path, const char* format, const char* out_path, char** out_json);

#ifdef __cplusplus
}
#endif

#endif

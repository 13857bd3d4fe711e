#ifndef QRDYN_H
#define QRDYN_H

/* C interface to the qrdyn library.
 *
 * Every function returns a qrdyn_status. On failure the message is available
 * from qrdyn_last_error() on the calling thread until its next qrdyn call.
 * Objects returned through out parameters are owned by the caller and are
 * released with the matching *_free function. */

#include <stddef.h>

#if defined(QRDYN_BUILDING_LIBRARY)
#define QRDYN_API __attribute__((visibility("default")))
#else
#define QRDYN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qrdyn_status {
    QRDYN_OK = 0,
    QRDYN_ERR_CONFIG = 1,    /* invalid configuration document or parameter */
    QRDYN_ERR_NUMERICAL = 2, /* integration, degeneracy or consistency failure */
    QRDYN_ERR_IO = 3,        /* file could not be read or written */
    QRDYN_ERR_CONTRACT = 4,  /* inconsistent input data */
    QRDYN_ERR_ARGUMENT = 5,  /* null handle or out-of-range index */
    QRDYN_ERR_INTERNAL = 6
} qrdyn_status;

typedef enum qrdyn_format { QRDYN_FORMAT_CSV = 0, QRDYN_FORMAT_JSON = 1 } qrdyn_format;

typedef enum qrdyn_measure {
    QRDYN_MEASURE_C = 0,  /* concurrence */
    QRDYN_MEASURE_QD = 1, /* quantum discord */
    QRDYN_MEASURE_D = 2   /* decoherence factor modulus */
} qrdyn_measure;

typedef struct qrdyn_config qrdyn_config;
typedef struct qrdyn_sweep qrdyn_sweep;
typedef struct qrdyn_table qrdyn_table;

QRDYN_API const char* qrdyn_version(void);
QRDYN_API const char* qrdyn_last_error(void);
QRDYN_API const char* qrdyn_status_name(int status);
QRDYN_API void qrdyn_string_free(char* s);

/* Configuration. A document with no keys gives the defaults. */
QRDYN_API int qrdyn_config_parse(const char* yaml_text, qrdyn_config** out);
QRDYN_API int qrdyn_config_load(const char* path, qrdyn_config** out);
QRDYN_API void qrdyn_config_free(qrdyn_config* config);
/* 0 picks the hardware concurrency. Results do not depend on it. */
QRDYN_API int qrdyn_config_set_threads(qrdyn_config* config, int threads);
QRDYN_API int qrdyn_config_set_measure(qrdyn_config* config, int measure);
/* NULL dir, negative format or negative plot keep the current value. */
QRDYN_API int qrdyn_config_set_output(qrdyn_config* config, const char* dir, int format, int plot);
QRDYN_API int qrdyn_config_get_output(const qrdyn_config* config, const char** dir, const char** prefix,
                                      int* format, int* plot);
QRDYN_API int qrdyn_config_get_measure(const qrdyn_config* config, int* measure);
/* Nonzero when the document declared any r_grid, tau_grid or a_grid. */
QRDYN_API int qrdyn_config_has_grid(const qrdyn_config* config, int* has_grid);
QRDYN_API int qrdyn_config_effective_json(const qrdyn_config* config, char** out);

/* Runs. A trajectory is a sweep holding the single base point. */
QRDYN_API int qrdyn_run_trajectory(const qrdyn_config* config, qrdyn_sweep** out);
/* Failed grid points are kept as error entries and do not fail the call. */
QRDYN_API int qrdyn_run_sweep(const qrdyn_config* config, qrdyn_sweep** out);
/* Reads a trajectory or sweep CSV written by qrdyn_table_write. */
QRDYN_API int qrdyn_sweep_load(const char* csv_path, qrdyn_sweep** out);
QRDYN_API void qrdyn_sweep_free(qrdyn_sweep* sweep);
QRDYN_API int qrdyn_sweep_size(const qrdyn_sweep* sweep, size_t* points, size_t* failed);
QRDYN_API int qrdyn_sweep_error(const qrdyn_sweep* sweep, size_t index, const char** message);

/* Tables. `analysis` may be NULL for the default analysis settings. */
QRDYN_API int qrdyn_sweep_records(const qrdyn_sweep* sweep, qrdyn_table** out);
QRDYN_API int qrdyn_sweep_summary(const qrdyn_sweep* sweep, const qrdyn_config* analysis, qrdyn_table** out);
QRDYN_API int qrdyn_fit_peaks(const qrdyn_sweep* sweep, const qrdyn_config* analysis, qrdyn_table** out);
QRDYN_API int qrdyn_periods(const qrdyn_sweep* sweep, const qrdyn_config* analysis, qrdyn_table** out);

QRDYN_API void qrdyn_table_free(qrdyn_table* table);
QRDYN_API int qrdyn_table_shape(const qrdyn_table* table, size_t* rows, size_t* columns);
QRDYN_API int qrdyn_table_column_name(const qrdyn_table* table, size_t column, const char** name);
/* Fails with QRDYN_ERR_CONTRACT when the cell holds text. */
QRDYN_API int qrdyn_table_number(const qrdyn_table* table, size_t row, size_t column, double* value);
/* Numbers are rendered with 17 significant digits. */
QRDYN_API int qrdyn_table_text(const qrdyn_table* table, size_t row, size_t column, char** text);
QRDYN_API int qrdyn_table_write(const qrdyn_table* table, const char* path, int format);

/* Plots. `written` is set to 0 when there was nothing to draw. */
QRDYN_API int qrdyn_plot_sweep(const qrdyn_sweep* sweep, int measure, const char* path, int* written);
QRDYN_API int qrdyn_plot_fit(const qrdyn_sweep* sweep, const qrdyn_config* analysis, const char* path,
                             int* written);

#ifdef __cplusplus
}
#endif

#endif

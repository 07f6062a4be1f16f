#ifndef CORRSCREEN_H
#define CORRSCREEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsMethod {
  CS_METHOD_QUANTILE = 0,
  CS_METHOD_FWER = 1,
  CS_METHOD_POLI = 2,
  CS_METHOD_HERO = 3,
} CsMethod;

typedef enum CsPipeline {
  CS_PIPELINE_CS = 0,
  CS_PIPELINE_CA = 1,
} CsPipeline;

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_FORMAT = 3,
  CS_STATUS_PARSE = 4,
  CS_STATUS_DEGENERATE_SERIES = 5,
  CS_STATUS_VERSION = 6,
  CS_STATUS_COVARIANCE = 7,
  CS_STATUS_NUMERICAL = 8,
  CS_STATUS_IO = 9,
  CS_STATUS_PANIC = 10,
} CsStatus;

// Regions collected so far; validated when inference runs.
typedef struct CsDataset CsDataset;

typedef struct CsNetwork CsNetwork;

typedef struct CsInferenceConfig {
  enum CsMethod method;
  // Used by `Quantile` and `Fwer` only.
  double alpha;
  double exceedance_level;
  size_t surrogate_reps;
  uint64_t seed;
  enum CsPipeline pipeline;
} CsInferenceConfig;

// One edge; `a` and `b` index the network's region list.
typedef struct CsEdge {
  size_t a;
  size_t b;
  double threshold;
  double exceedance;
  bool detected;
} CsEdge;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library on the same thread.
const char *cs_last_error_message(void);

const char *cs_version(void);

// Quantile at `alpha = 0`, level 0.05, one surrogate replicate, seed 0, CS.
struct CsInferenceConfig cs_inference_config_default(void);

struct CsDataset *cs_dataset_new(void);

// Appends a region of `p` voxels with `n` samples each.
enum CsStatus cs_dataset_add_region(struct CsDataset *ds,
                                    const char *region_id,
                                    const double *values,
                                    size_t p,
                                    size_t n);

// Reads a wide CSV dataset. On success `*out` receives a new handle.
enum CsStatus cs_dataset_load(const char *path, bool drop_constant, struct CsDataset **out);

size_t cs_dataset_region_count(const struct CsDataset *ds);

void cs_dataset_free(struct CsDataset *ds);

// Infers a network. `config` may be null for the defaults.
enum CsStatus cs_infer(const struct CsDataset *ds,
                       const struct CsInferenceConfig *config,
                       struct CsNetwork **out);

size_t cs_network_region_count(const struct CsNetwork *net);

// Region id at `index`, or null when out of range. Owned by the network.
const char *cs_network_region_id(const struct CsNetwork *net, size_t index);

size_t cs_network_edge_count(const struct CsNetwork *net);

size_t cs_network_detected_count(const struct CsNetwork *net);

enum CsStatus cs_network_edge(const struct CsNetwork *net, size_t index, struct CsEdge *out);

enum CsStatus cs_network_save(const struct CsNetwork *net, const char *path);

enum CsStatus cs_network_load(const char *path, struct CsNetwork **out);

void cs_network_free(struct CsNetwork *net);

enum CsStatus cs_pearson(const double *x, const double *y, size_t len, double *out);

enum CsStatus cs_threshold_hero(size_t n, size_t p_a, size_t p_b, double *out);

// Threshold from a sample of signed null correlations. Quantile and FWER
// use their absolute values, Poli the signed values; `Hero` ignores the
// sample and needs `n`.
enum CsStatus cs_threshold_from_null(const double *null_values,
                                     size_t len,
                                     enum CsMethod method,
                                     double alpha,
                                     size_t n,
                                     size_t p_a,
                                     size_t p_b,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORRSCREEN_H */

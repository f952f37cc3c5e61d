#ifndef THETAGRAPH_H
#define THETAGRAPH_H

#include <stdbool.h>
#include <stddef.h>

/*
 Status codes returned by every `tg_*` function.
 */
typedef enum TgStatus {
  /*
   The call succeeded and the property asked about holds.
   */
  TG_STATUS_OK = 0,
  /*
   The call succeeded and produced a refutation (a violating weighting,
   a Farkas certificate or an invalid certificate).
   */
  TG_STATUS_REFUTED = 1,
  /*
   A required pointer argument was null.
   */
  TG_STATUS_NULL_POINTER = 2,
  /*
   A string argument was not valid UTF-8.
   */
  TG_STATUS_INVALID_UTF8 = 3,
  /*
   Malformed JSON or an ill-formed graph, point or certificate.
   */
  TG_STATUS_INVALID_INPUT = 4,
  /*
   The graph contains no theta subgraph.
   */
  TG_STATUS_NO_THETA = 5,
  /*
   The request exceeds a configured size bound.
   */
  TG_STATUS_SIZE_BOUND = 6,
  /*
   An internal consistency check failed.
   */
  TG_STATUS_INTERNAL = 7,
  /*
   A panic was caught at the boundary.
   */
  TG_STATUS_PANIC = 8,
} TgStatus;

/*
 Opaque handle to a validated metric graph.
 */
typedef struct TgGraph TgGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a graph from its JSON description. On success `*out` receives a
 handle to release with [`tg_graph_free`].

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TgStatus tg_graph_from_json(const char *json, struct TgGraph **out);

/*
 Releases a graph handle. Null is ignored.

 # Safety
 `g` must come from [`tg_graph_from_json`] and not be used afterwards.
 */
void tg_graph_free(struct TgGraph *g);

/*
 Writes the vertex and edge counts.

 # Safety
 All pointers must be valid.
 */
enum TgStatus tg_graph_counts(const struct TgGraph *g, size_t *vertices, size_t *edges);

/*
 Serializes the graph back to JSON.

 # Safety
 `g` and `out` must be valid.
 */
enum TgStatus tg_graph_to_json(const struct TgGraph *g, char **out);

/*
 Exact distance between two points given as JSON objects. The result is a
 rational in `p/q` form.

 # Safety
 All pointers must be valid; strings NUL-terminated.
 */
enum TgStatus tg_distance(const struct TgGraph *g,
                          const char *p_json,
                          const char *q_json,
                          char **out);

/*
 Sets `*out` to whether the graph contains a theta subgraph.

 # Safety
 `g` and `out` must be valid.
 */
enum TgStatus tg_contains_theta(const struct TgGraph *g, bool *out);

/*
 A theta subgraph of minimum total length, as a theta certificate.

 # Safety
 `g` and `out` must be valid.
 */
enum TgStatus tg_minimal_theta_json(const struct TgGraph *g, char **out);

/*
 The six-point witness certificate for a graph containing a theta.

 # Safety
 `g` and `out` must be valid.
 */
enum TgStatus tg_witness_json(const struct TgGraph *g, char **out);

/*
 Decides negative type of the metric on `points_json` (a JSON array of
 points, or a certificate carrying points; null means all vertices).
 Returns [`TgStatus::Ok`] or [`TgStatus::Refuted`] with the certificate
 in `*out`.

 # Safety
 `g` and `out` must be valid; `points_json` null or NUL-terminated.
 */
enum TgStatus tg_negtype_json(const struct TgGraph *g, const char *points_json, char **out);

/*
 Decides ℓ1-embeddability of the metric on `points_json` (as for
 [`tg_negtype_json`]). `max_points` of zero selects the default bound.
 Returns [`TgStatus::Ok`] with a cut decomposition or
 [`TgStatus::Refuted`] with a Farkas certificate.

 # Safety
 `g` and `out` must be valid; `points_json` null or NUL-terminated.
 */
enum TgStatus tg_l1_json(const struct TgGraph *g,
                         const char *points_json,
                         size_t max_points,
                         char **out);

/*
 Re-checks a certificate (bare, or embedded in a run report) against the
 graph. Returns [`TgStatus::Ok`] if valid and [`TgStatus::Refuted`] if
 not; the reason is then available from [`tg_last_error`].

 # Safety
 `g` must be valid and `certificate_json` NUL-terminated.
 */
enum TgStatus tg_verify_json(const struct TgGraph *g, const char *certificate_json);

/*
 Message for the last failed call on this thread, or null. The pointer is
 valid until the next `tg_*` call on the same thread.
 */
const char *tg_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from a `tg_*` output parameter and not be freed twice.
 */
void tg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THETAGRAPH_H */

#ifndef HBLCERT_H
#define HBLCERT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HblStatus {
  HBL_STATUS_OK = 0,
  // The presentation failed verification, or the datum is infeasible.
  HBL_STATUS_INVALID = 1,
  HBL_STATUS_NULL_ARGUMENT = 2,
  // Input is not UTF-8 or does not parse.
  HBL_STATUS_PARSE = 3,
  // A build or serialization could not finish.
  HBL_STATUS_FAILED = 4,
  HBL_STATUS_PANIC = 5,
} HblStatus;

// Opaque HBL datum.
typedef struct HblDatum HblDatum;

// Opaque presentation.
typedef struct HblPresentation HblPresentation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or null. Owned by the library.
const char *hbl_last_error(void);

// Parses a datum file's JSON text.
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum HblStatus hbl_datum_from_json(const char *json, struct HblDatum **out);

// # Safety
// `d` must come from this library and not be freed twice; null is ignored.
void hbl_datum_free(struct HblDatum *d);

// Parses a presentation file's JSON text.
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum HblStatus hbl_presentation_from_json(const char *json, struct HblPresentation **out);

// # Safety
// `p` must come from this library and not be freed twice; null is ignored.
void hbl_presentation_free(struct HblPresentation *p);

// `HBL_STATUS_OK` if `p` is a valid presentation of `d`, `HBL_STATUS_INVALID` otherwise;
// the failed conditions are in [`hbl_last_error`].
//
// # Safety
// Handles must be live objects from this library.
enum HblStatus hbl_verify(const struct HblDatum *d, const struct HblPresentation *p);

// Writes the certified constant `C` to `value`.
//
// # Safety
// Handles must be live objects from this library and `value` a valid pointer.
enum HblStatus hbl_bound(const struct HblDatum *d, const struct HblPresentation *p, double *value);

// Builds a presentation from the kernel lattice of `d`, capped at `max_lattice` subspaces.
//
// # Safety
// `d` must be a live handle and `out` a valid pointer.
enum HblStatus hbl_build(const struct HblDatum *d,
                         size_t max_lattice,
                         struct HblPresentation **out);

// Canonical JSON text of a presentation; release with [`hbl_string_free`].
//
// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum HblStatus hbl_presentation_to_json(const struct HblPresentation *p, char **out);

// # Safety
// `s` must come from this library and not be freed twice; null is ignored.
void hbl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HBLCERT_H */

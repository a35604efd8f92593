/** Constraint drafts as the form holds them, and their client-side validation.
 *
 * Drafts keep raw input strings so the form can hold half-typed values;
 * validation turns a draft into the JSON document the service accepts, or
 * into a list of messages explaining why it cannot be sent yet.
 */

import type { ConstraintsDoc, Method } from "./types.js";

export interface ConstraintDrafts {
  /** POI ids every itinerary must include. */
  mustSee: number[];
  /** Budget cap; empty string disables the section. */
  budgetLimit: string;
  /** Clock offset at the start POI, seconds. */
  timeStart: string;
  /** Cap on total elapsed seconds; empty string disables the time section
   * unless another time field is set. */
  timeLimit: string;
  /** Stay duration applied to every POI, seconds. */
  stayDefault: string;
}

export function emptyDrafts(): ConstraintDrafts {
  return { mustSee: [], budgetLimit: "", timeStart: "", timeLimit: "", stayDefault: "" };
}

export interface DraftValidation {
  ok: boolean;
  errors: string[];
  /** Document to POST, or null when the draft has no active sections. */
  doc: ConstraintsDoc | null;
}

function parseNumberField(
  raw: string,
  label: string,
  errors: string[],
  opts: { positive?: boolean } = {},
): number | null {
  const trimmed = raw.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  if (!Number.isFinite(value)) {
    errors.push(`${label} must be a number`);
    return null;
  }
  if (opts.positive && value <= 0) {
    errors.push(`${label} must be positive`);
    return null;
  }
  if (!opts.positive && value < 0) {
    errors.push(`${label} must not be negative`);
    return null;
  }
  return value;
}

/** Validate a draft against the catalog and the rest of the query. */
export function validateDrafts(
  drafts: ConstraintDrafts,
  catalogIds: ReadonlySet<number>,
  query: { s: number | null; d: number | null; L: number | null; method: Method },
): DraftValidation {
  const errors: string[] = [];

  for (const id of drafts.mustSee) {
    if (!catalogIds.has(id)) errors.push(`must-see POI ${id} is not in the catalog`);
  }
  const dupes = drafts.mustSee.filter((id, i) => drafts.mustSee.indexOf(id) !== i);
  if (dupes.length > 0) errors.push(`must-see POI ${dupes[0]} listed twice`);

  if (query.L !== null) {
    const interior = drafts.mustSee.filter((id) => id !== query.s && id !== query.d);
    if (interior.length > query.L - 2) {
      errors.push(
        `${interior.length} must-see POIs cannot fit in the ${query.L - 2} interior stops of a length-${query.L} itinerary`,
      );
    }
  }

  const budget = parseNumberField(drafts.budgetLimit, "budget limit", errors, {
    positive: true,
  });
  const timeLimit = parseNumberField(drafts.timeLimit, "time limit", errors, {
    positive: true,
  });
  const timeStart = parseNumberField(drafts.timeStart, "start time", errors);
  const stayDefault = parseNumberField(drafts.stayDefault, "stay duration", errors);

  const doc: ConstraintsDoc = {};
  if (drafts.mustSee.length > 0) doc.must_see = [...drafts.mustSee];
  if (budget !== null) doc.budget = { limit: budget };
  if (timeLimit !== null || timeStart !== null || stayDefault !== null) {
    doc.time = {};
    if (timeStart !== null) doc.time.start = timeStart;
    if (timeLimit !== null) doc.time.limit = timeLimit;
    if (stayDefault !== null) doc.time.stay_default = stayDefault;
  }

  const active = Object.keys(doc).length > 0;
  if (active && query.method === "lstm") {
    errors.push("the greedy decoder ignores constraints; switch method to sampler");
  }

  return { ok: errors.length === 0, errors, doc: active ? doc : null };
}

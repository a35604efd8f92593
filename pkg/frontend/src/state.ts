/** Query state behind the form: what is selected, what came back, and
 * whether the submit button should be live.
 *
 * Transitions never fire requests themselves; the page decides when to
 * submit, so editing constraints only re-arms the button.
 */

import { ConstraintDrafts, emptyDrafts, validateDrafts } from "./constraints.js";
import type { ApiError, Method, RecommendResponse } from "./types.js";

export interface UIQueryState {
  s: number | null;
  d: number | null;
  k: number;
  L: number | null;
  method: Method;
  /** Raw seed input; empty string lets the service draw one. */
  seed: string;
  /** Sampler iteration budget; null uses the engine default. */
  iterations: number | null;
  drafts: ConstraintDrafts;
  lastResponse: RecommendResponse | null;
  lastError: ApiError | null;
  pending: boolean;
}

export function initialState(): UIQueryState {
  return {
    s: null,
    d: null,
    k: 3,
    L: null,
    method: "lstm",
    seed: "",
    iterations: null,
    drafts: emptyDrafts(),
    lastResponse: null,
    lastError: null,
    pending: false,
  };
}

/** Map click or dropdown pick: first choice fills s, the next fills d. */
export function pickPoi(state: UIQueryState, poiId: number): UIQueryState {
  if (state.s === null || state.d !== null) {
    return { ...state, s: poiId, d: null };
  }
  if (poiId === state.s) return state;
  return { ...state, d: poiId };
}

export function setEndpoints(
  state: UIQueryState,
  s: number | null,
  d: number | null,
): UIQueryState {
  return { ...state, s, d };
}

export function setShape(
  state: UIQueryState,
  k: number,
  L: number | null,
  method: Method,
): UIQueryState {
  return { ...state, k, L, method };
}

export function setSeed(state: UIQueryState, seed: string): UIQueryState {
  return { ...state, seed };
}

export function setIterations(state: UIQueryState, iterations: number | null): UIQueryState {
  return { ...state, iterations };
}

export function editDrafts(
  state: UIQueryState,
  patch: Partial<ConstraintDrafts>,
): UIQueryState {
  return { ...state, drafts: { ...state.drafts, ...patch } };
}

export function toggleMustSee(state: UIQueryState, poiId: number): UIQueryState {
  const has = state.drafts.mustSee.includes(poiId);
  const mustSee = has
    ? state.drafts.mustSee.filter((id) => id !== poiId)
    : [...state.drafts.mustSee, poiId];
  return editDrafts(state, { mustSee });
}

export function submitStarted(state: UIQueryState): UIQueryState {
  return { ...state, pending: true, lastError: null };
}

export function responseArrived(
  state: UIQueryState,
  response: RecommendResponse,
): UIQueryState {
  return { ...state, pending: false, lastResponse: response, lastError: null };
}

export function requestFailed(state: UIQueryState, error: ApiError): UIQueryState {
  return { ...state, pending: false, lastError: error };
}

/** Copy the seed echoed by the last response into the seed field, so the
 * next submission reproduces the same routes. */
export function reuseEchoedSeed(state: UIQueryState): UIQueryState {
  if (state.lastResponse === null) return state;
  return { ...state, seed: String(state.lastResponse.seed) };
}

export interface SubmitReadiness {
  enabled: boolean;
  reasons: string[];
}

/** Whether submit is live, with the messages shown next to the button.
 * Every field edit is re-evaluated through here, so any change after a
 * response re-arms the button; nothing auto-submits. */
export function submitReadiness(
  state: UIQueryState,
  catalogIds: ReadonlySet<number>,
): SubmitReadiness {
  const reasons: string[] = [];
  if (state.pending) reasons.push("a request is already running");
  if (state.s === null) reasons.push("pick a start POI");
  if (state.d === null) reasons.push("pick an end POI");
  if (state.s !== null && state.d !== null && state.s === state.d) {
    reasons.push("start and end must differ");
  }
  if (!Number.isInteger(state.k) || state.k < 1) reasons.push("k must be at least 1");
  if (state.L !== null && (!Number.isInteger(state.L) || state.L < 3)) {
    reasons.push("length must be at least 3");
  }
  if (state.seed.trim() !== "" && !/^\d+$/.test(state.seed.trim())) {
    reasons.push("seed must be a whole number");
  }
  if (
    state.iterations !== null &&
    (!Number.isInteger(state.iterations) || state.iterations < 1)
  ) {
    reasons.push("iterations must be at least 1");
  }
  const draft = validateDrafts(state.drafts, catalogIds, {
    s: state.s,
    d: state.d,
    L: state.L,
    method: state.method,
  });
  reasons.push(...draft.errors);
  return { enabled: reasons.length === 0, reasons };
}

/** The /recommend body for the current state. Call only when submit is
 * enabled; throws on drafts that failed validation. */
export function buildRequest(
  state: UIQueryState,
  catalogIds: ReadonlySet<number>,
): import("./types.js").RecommendRequest {
  if (state.s === null || state.d === null) {
    throw new Error("endpoints not selected");
  }
  const draft = validateDrafts(state.drafts, catalogIds, {
    s: state.s,
    d: state.d,
    L: state.L,
    method: state.method,
  });
  if (!draft.ok) throw new Error(`constraint draft invalid: ${draft.errors[0]}`);
  const body: import("./types.js").RecommendRequest = {
    s: state.s,
    d: state.d,
    k: state.k,
    method: state.method,
  };
  if (state.L !== null) body.L = state.L;
  if (draft.doc !== null) body.constraints = draft.doc;
  const seed = state.seed.trim();
  if (seed !== "") body.seed = Number(seed);
  if (state.iterations !== null) body.iterations = state.iterations;
  return body;
}

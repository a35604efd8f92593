/** Page wiring: form controls on the left, map and results on the right. */

import { ApiClient, isApiError, SUPERSEDED } from "./api.js";
import { MapWidget } from "./map.js";
import { buildResultView, errorText, routeColor } from "./render.js";
import {
  buildRequest,
  initialState,
  pickPoi,
  reuseEchoedSeed,
  responseArrived,
  requestFailed,
  submitReadiness,
  submitStarted,
  toggleMustSee,
  UIQueryState,
} from "./state.js";
import type { Poi } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const apiBaseInput = el<HTMLInputElement>("api-base");
const connectButton = el<HTMLButtonElement>("connect");
const datasetLabel = el<HTMLSpanElement>("dataset-label");
const sSelect = el<HTMLSelectElement>("s-select");
const dSelect = el<HTMLSelectElement>("d-select");
const kInput = el<HTMLInputElement>("k-input");
const lInput = el<HTMLInputElement>("l-input");
const methodSelect = el<HTMLSelectElement>("method-select");
const seedInput = el<HTMLInputElement>("seed-input");
const iterationsInput = el<HTMLInputElement>("iterations-input");
const mustSeeBox = el<HTMLDivElement>("must-see-box");
const budgetInput = el<HTMLInputElement>("budget-input");
const timeStartInput = el<HTMLInputElement>("time-start-input");
const timeLimitInput = el<HTMLInputElement>("time-limit-input");
const stayInput = el<HTMLInputElement>("stay-input");
const checkDraftButton = el<HTMLButtonElement>("check-draft");
const draftStatus = el<HTMLDivElement>("draft-status");
const submitButton = el<HTMLButtonElement>("submit");
const submitReasons = el<HTMLDivElement>("submit-reasons");
const errorBox = el<HTMLDivElement>("error-box");
const resultMeta = el<HTMLDivElement>("result-meta");
const reuseSeedButton = el<HTMLButtonElement>("reuse-seed");
const itineraryList = el<HTMLOListElement>("itinerary-list");

const map = new MapWidget(el<HTMLDivElement>("map"));

let client: ApiClient | null = null;
let catalog = new Map<number, Poi>();
let catalogIds: ReadonlySet<number> = new Set();
let state: UIQueryState = initialState();

function setState(next: UIQueryState): void {
  state = next;
  syncControls();
}

function syncControls(): void {
  sSelect.value = state.s === null ? "" : String(state.s);
  dSelect.value = state.d === null ? "" : String(state.d);
  seedInput.value = state.seed;
  for (const input of mustSeeBox.querySelectorAll<HTMLInputElement>("input")) {
    input.checked = state.drafts.mustSee.includes(Number(input.value));
  }
  const readiness = submitReadiness(state, catalogIds);
  submitButton.disabled = !readiness.enabled;
  submitReasons.textContent = readiness.reasons.join("; ");
  reuseSeedButton.disabled = state.lastResponse === null;
}

function readStateFromControls(): void {
  const s = sSelect.value === "" ? null : Number(sSelect.value);
  const d = dSelect.value === "" ? null : Number(dSelect.value);
  const k = Number(kInput.value || "3");
  const L = lInput.value.trim() === "" ? null : Number(lInput.value);
  const method = methodSelect.value === "sampler" ? "sampler" : "lstm";
  const iterations =
    iterationsInput.value.trim() === "" ? null : Number(iterationsInput.value);
  setState({
    ...state,
    s,
    d,
    k,
    L,
    method,
    seed: seedInput.value,
    iterations,
    drafts: {
      ...state.drafts,
      budgetLimit: budgetInput.value,
      timeStart: timeStartInput.value,
      timeLimit: timeLimitInput.value,
      stayDefault: stayInput.value,
    },
  });
}

function fillPoiControls(pois: Poi[]): void {
  const options = pois
    .map((p) => `<option value="${p.poi_id}">${p.poi_id} (${p.category})</option>`)
    .join("");
  sSelect.innerHTML = `<option value="">pick...</option>${options}`;
  dSelect.innerHTML = `<option value="">pick...</option>${options}`;
  mustSeeBox.replaceChildren();
  for (const p of pois) {
    const label = document.createElement("label");
    const input = document.createElement("input");
    input.type = "checkbox";
    input.value = String(p.poi_id);
    input.addEventListener("change", () => {
      setState(toggleMustSee(state, p.poi_id));
    });
    label.append(input, ` ${p.poi_id} ${p.category}`);
    mustSeeBox.append(label);
  }
}

async function connect(): Promise<void> {
  client = new ApiClient(apiBaseInput.value);
  try {
    const [health, poisResponse] = await Promise.all([client.health(), client.pois()]);
    datasetLabel.textContent = `${health.dataset}, ${health.n_pois} POIs`;
    catalog = new Map(poisResponse.pois.map((p) => [p.poi_id, p]));
    catalogIds = new Set(catalog.keys());
    fillPoiControls(poisResponse.pois);
    map.fit(poisResponse.pois);
    map.render([], markerViewsOnly());
    setState(initialState());
    errorBox.textContent = "";
  } catch (exc) {
    errorBox.textContent = isApiError(exc) ? errorText(exc) : String(exc);
  }
}

function markerViewsOnly() {
  const view = map.viewport;
  if (!view) return [];
  return buildResultView(
    { itineraries: [], seed: 0, method: "lstm", elapsed_seconds: 0 },
    catalog,
    state.drafts.mustSee,
    view,
  ).markers;
}

async function submit(): Promise<void> {
  if (!client || !map.viewport) return;
  readStateFromControls();
  const readiness = submitReadiness(state, catalogIds);
  if (!readiness.enabled) return;
  const body = buildRequest(state, catalogIds);
  setState(submitStarted(state));
  try {
    const response = await client.recommend(body);
    setState(responseArrived(state, response));
    renderResponse();
  } catch (exc) {
    if (exc === SUPERSEDED) return;
    const error = isApiError(exc)
      ? exc
      : { status: 0, code: "network_error", message: String(exc) };
    setState(requestFailed(state, error));
    errorBox.textContent = errorText(error);
  }
}

function renderResponse(): void {
  const view = map.viewport;
  const response = state.lastResponse;
  if (!view || !response) return;
  errorBox.textContent = "";
  const result = buildResultView(response, catalog, state.drafts.mustSee, view);
  map.render(result.routes, result.markers);
  resultMeta.textContent =
    `${result.routes.length} itineraries, ${result.seedText}, ${result.elapsedText}`;
  itineraryList.replaceChildren();
  for (const route of result.routes) {
    const item = document.createElement("li");
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = routeColor(route.index);
    const seq = document.createElement("code");
    seq.textContent = route.poiIds.join(" -> ");
    const meta = document.createElement("span");
    meta.className = "route-meta";
    meta.textContent =
      ` ${route.perplexityText}, anchor ${route.prominent}` +
      (route.mustSeeOnRoute.length > 0
        ? `, must-see ${route.mustSeeOnRoute.join(", ")}`
        : "");
    item.append(swatch, seq, meta);
    itineraryList.append(item);
  }
}

async function checkDraft(): Promise<void> {
  if (!client) return;
  readStateFromControls();
  const readiness = submitReadiness(state, catalogIds);
  const draftErrors = readiness.reasons.filter(
    (r) => !r.startsWith("pick ") && r !== "start and end must differ",
  );
  if (draftErrors.length > 0) {
    draftStatus.textContent = draftErrors.join("; ");
    return;
  }
  try {
    const body = buildRequest(
      { ...state, s: state.s ?? -1, d: state.d ?? -1 },
      catalogIds,
    );
    const result = await client.validateConstraints({
      constraints: body.constraints ?? {},
    });
    draftStatus.textContent = `service accepted the draft (must-see: ${
      result.summary.must_see.join(", ") || "none"
    })`;
  } catch (exc) {
    draftStatus.textContent = isApiError(exc) ? errorText(exc) : String(exc);
  }
}

for (const input of [
  sSelect,
  dSelect,
  kInput,
  lInput,
  methodSelect,
  seedInput,
  iterationsInput,
  budgetInput,
  timeStartInput,
  timeLimitInput,
  stayInput,
]) {
  input.addEventListener("input", () => readStateFromControls());
  input.addEventListener("change", () => readStateFromControls());
}

map.onMarkerClick = (poiId) => {
  setState(pickPoi(state, poiId));
};

connectButton.addEventListener("click", () => void connect());
submitButton.addEventListener("click", () => void submit());
checkDraftButton.addEventListener("click", () => void checkDraft());
reuseSeedButton.addEventListener("click", () => {
  setState(reuseEchoedSeed(state));
});

void connect();

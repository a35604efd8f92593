/** Slippy-map widget: a fixed tile grid with an SVG overlay for routes. */

import {
  fitViewport,
  LatLon,
  OSM_TILE_TEMPLATE,
  TILE_SIZE,
  tilesFor,
  tileUrl,
  Viewport,
} from "./geo.js";
import type { MarkerView, RouteView } from "./render.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class MapWidget {
  private readonly root: HTMLElement;
  private readonly tileLayer: HTMLDivElement;
  private readonly overlay: SVGSVGElement;
  private view: Viewport | null = null;
  onMarkerClick: ((poiId: number) => void) | null = null;

  constructor(root: HTMLElement, private readonly tileTemplate = OSM_TILE_TEMPLATE) {
    this.root = root;
    this.root.classList.add("map-widget");
    this.tileLayer = document.createElement("div");
    this.tileLayer.className = "tile-layer";
    this.overlay = document.createElementNS(SVG_NS, "svg");
    this.overlay.setAttribute("class", "route-overlay");
    this.root.append(this.tileLayer, this.overlay);
  }

  /** Fit the viewport to the POIs and lay the tile grid. */
  fit(points: LatLon[]): Viewport {
    const width = this.root.clientWidth || 640;
    const height = this.root.clientHeight || 480;
    this.view = fitViewport(points, width, height);
    this.overlay.setAttribute("viewBox", `0 0 ${width} ${height}`);
    this.tileLayer.replaceChildren();
    for (const tile of tilesFor(this.view)) {
      const img = document.createElement("img");
      img.src = tileUrl(this.tileTemplate, tile);
      img.width = TILE_SIZE;
      img.height = TILE_SIZE;
      img.style.left = `${tile.left}px`;
      img.style.top = `${tile.top}px`;
      img.alt = "";
      // Offline or blocked tile servers leave the plain background.
      img.addEventListener("error", () => img.remove());
      this.tileLayer.append(img);
    }
    return this.view;
  }

  get viewport(): Viewport | null {
    return this.view;
  }

  /** Replace the overlay with the given routes and markers. */
  render(routes: RouteView[], markers: MarkerView[]): void {
    this.overlay.replaceChildren();
    for (const route of routes) {
      const line = document.createElementNS(SVG_NS, "polyline");
      line.setAttribute("points", route.points);
      line.setAttribute("fill", "none");
      line.setAttribute("stroke", route.color);
      line.setAttribute("stroke-width", "3.5");
      line.setAttribute("stroke-linejoin", "round");
      line.setAttribute("opacity", "0.85");
      this.overlay.append(line);
    }
    for (const marker of markers) {
      const g = document.createElementNS(SVG_NS, "g");
      g.setAttribute("class", "poi-marker");
      g.setAttribute("transform", `translate(${marker.x},${marker.y})`);

      if (marker.mustSee) {
        const ring = document.createElementNS(SVG_NS, "circle");
        ring.setAttribute("r", "11");
        ring.setAttribute("class", "must-see-ring");
        g.append(ring);
      }
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("r", marker.onRoutes.length > 0 ? "6" : "4");
      let cls = "poi-dot";
      if (marker.isStart) cls += " start";
      else if (marker.isEnd) cls += " end";
      else if (marker.onRoutes.length > 0) cls += " on-route";
      dot.setAttribute("class", cls);
      g.append(dot);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", "8");
      label.setAttribute("y", "-6");
      label.textContent = String(marker.poiId);
      g.append(label);

      const title = document.createElementNS(SVG_NS, "title");
      title.textContent =
        `POI ${marker.poiId} (${marker.category})` +
        (marker.mustSee ? ", must-see" : "");
      g.append(title);

      g.addEventListener("click", () => this.onMarkerClick?.(marker.poiId));
      this.overlay.append(g);
    }
  }
}

/** Web-mercator math for a fixed (non-panning) slippy-map viewport. */

export const TILE_SIZE = 256;

export interface LatLon {
  lat: number;
  lon: number;
}

/** World x in pixels at a zoom level. */
export function lonToWorldX(lon: number, zoom: number): number {
  return ((lon + 180) / 360) * TILE_SIZE * 2 ** zoom;
}

/** World y in pixels at a zoom level. */
export function latToWorldY(lat: number, zoom: number): number {
  const rad = (lat * Math.PI) / 180;
  const merc = Math.log(Math.tan(rad) + 1 / Math.cos(rad));
  return ((1 - merc / Math.PI) / 2) * TILE_SIZE * 2 ** zoom;
}

export interface Viewport {
  zoom: number;
  /** World pixel coordinates of the viewport's top-left corner. */
  originX: number;
  originY: number;
  width: number;
  height: number;
}

/** Screen position of a coordinate inside a viewport. */
export function project(point: LatLon, view: Viewport): { x: number; y: number } {
  return {
    x: lonToWorldX(point.lon, view.zoom) - view.originX,
    y: latToWorldY(point.lat, view.zoom) - view.originY,
  };
}

/** Pick the largest integer zoom at which every point fits inside the
 * padded viewport, and center the viewport on the points' bounding box. */
export function fitViewport(
  points: LatLon[],
  width: number,
  height: number,
  opts: { padding?: number; maxZoom?: number } = {},
): Viewport {
  if (points.length === 0) throw new Error("fitViewport needs at least one point");
  const padding = opts.padding ?? 40;
  const maxZoom = opts.maxZoom ?? 17;
  const lats = points.map((p) => p.lat);
  const lons = points.map((p) => p.lon);
  const minLat = Math.min(...lats);
  const maxLat = Math.max(...lats);
  const minLon = Math.min(...lons);
  const maxLon = Math.max(...lons);

  let zoom = 0;
  for (let z = maxZoom; z >= 0; z--) {
    const spanX = lonToWorldX(maxLon, z) - lonToWorldX(minLon, z);
    const spanY = latToWorldY(minLat, z) - latToWorldY(maxLat, z);
    if (spanX <= width - 2 * padding && spanY <= height - 2 * padding) {
      zoom = z;
      break;
    }
  }
  const centerX = (lonToWorldX(minLon, zoom) + lonToWorldX(maxLon, zoom)) / 2;
  const centerY = (latToWorldY(minLat, zoom) + latToWorldY(maxLat, zoom)) / 2;
  return {
    zoom,
    originX: centerX - width / 2,
    originY: centerY - height / 2,
    width,
    height,
  };
}

export interface TilePlacement {
  z: number;
  x: number;
  y: number;
  /** Screen position of the tile's top-left corner. */
  left: number;
  top: number;
}

/** Tiles covering the viewport. x wraps around the antimeridian; rows
 * outside the mercator square are dropped. */
export function tilesFor(view: Viewport): TilePlacement[] {
  const n = 2 ** view.zoom;
  const first = {
    x: Math.floor(view.originX / TILE_SIZE),
    y: Math.floor(view.originY / TILE_SIZE),
  };
  const last = {
    x: Math.floor((view.originX + view.width) / TILE_SIZE),
    y: Math.floor((view.originY + view.height) / TILE_SIZE),
  };
  const tiles: TilePlacement[] = [];
  for (let ty = first.y; ty <= last.y; ty++) {
    if (ty < 0 || ty >= n) continue;
    for (let tx = first.x; tx <= last.x; tx++) {
      tiles.push({
        z: view.zoom,
        x: ((tx % n) + n) % n,
        y: ty,
        left: tx * TILE_SIZE - view.originX,
        top: ty * TILE_SIZE - view.originY,
      });
    }
  }
  return tiles;
}

/** URL on a standard slippy-map tile server. */
export function tileUrl(template: string, tile: TilePlacement): string {
  return template
    .replace("{z}", String(tile.z))
    .replace("{x}", String(tile.x))
    .replace("{y}", String(tile.y));
}

export const OSM_TILE_TEMPLATE = "https://tile.openstreetmap.org/{z}/{x}/{y}.png";

// World (meters, y up) to screen (pixels, y down) mapping.  The camera
// is a pure affine fit; box corners are computed from the API values
// without mutating them, so screen geometry stays faithful to the data.
export function fitCamera(bounds, widthPx, heightPx, marginPx = 20) {
    const spanX = Math.max(bounds.maxX - bounds.minX, 1e-6);
    const spanY = Math.max(bounds.maxY - bounds.minY, 1e-6);
    const scale = Math.min((widthPx - 2 * marginPx) / spanX, (heightPx - 2 * marginPx) / spanY);
    const cx = 0.5 * (bounds.minX + bounds.maxX);
    const cy = 0.5 * (bounds.minY + bounds.maxY);
    return {
        scale,
        tx: widthPx / 2 - scale * cx,
        ty: heightPx / 2 + scale * cy,
    };
}
export function worldToScreen(a, x, y) {
    return [a.tx + a.scale * x, a.ty - a.scale * y];
}
/** Rectangle corners in world coordinates, counterclockwise. */
export function boxCorners(x, y, psi, length, width) {
    const c = Math.cos(psi);
    const s = Math.sin(psi);
    const hl = length / 2;
    const hw = width / 2;
    const local = [[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]];
    return local.map(([lx, ly]) => [x + c * lx - s * ly, y + s * lx + c * ly]);
}
/** Screen-space corners as drawn by the renderer. */
export function boxScreenCorners(a, x, y, psi, length, width) {
    return boxCorners(x, y, psi, length, width).map(([wx, wy]) => worldToScreen(a, wx, wy));
}
export function boundsOfPoints(points) {
    let minX = Infinity;
    let maxX = -Infinity;
    let minY = Infinity;
    let maxY = -Infinity;
    for (const [x, y] of points) {
        minX = Math.min(minX, x);
        maxX = Math.max(maxX, x);
        minY = Math.min(minY, y);
        maxY = Math.max(maxY, y);
    }
    if (!Number.isFinite(minX)) {
        return { minX: -1, maxX: 1, minY: -1, maxY: 1 };
    }
    return { minX, maxX, minY, maxY };
}

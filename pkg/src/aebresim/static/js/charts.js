// Minimal state strip chart: speed (and implied acceleration) of the
// ego and object over the replay window, derived client-side from the
// observed positions by central differences.  Display-only; the API
// payload is never modified.
export function participantStateSeries(payload, id) {
    const t = [];
    const xs = [];
    const ys = [];
    for (const frame of payload.frames) {
        const row = frame.participants.find((p) => p[0] === id);
        if (row) {
            t.push(frame.frame / payload.fps);
            xs.push(row[1]);
            ys.push(row[2]);
        }
    }
    const speed = centralGradient(xs, ys, payload.fps);
    const accel = gradient1d(speed, payload.fps);
    return { t, speed, accel };
}
function centralGradient(xs, ys, fps) {
    const n = xs.length;
    const out = new Array(n).fill(0);
    for (let i = 0; i < n; i++) {
        const lo = Math.max(0, i - 1);
        const hi = Math.min(n - 1, i + 1);
        const dt = (hi - lo) / fps;
        if (dt > 0) {
            out[i] = Math.hypot(xs[hi] - xs[lo], ys[hi] - ys[lo]) / dt;
        }
    }
    return out;
}
function gradient1d(v, fps) {
    const n = v.length;
    const out = new Array(n).fill(0);
    for (let i = 0; i < n; i++) {
        const lo = Math.max(0, i - 1);
        const hi = Math.min(n - 1, i + 1);
        const dt = (hi - lo) / fps;
        if (dt > 0)
            out[i] = (v[hi] - v[lo]) / dt;
    }
    return out;
}
export function drawStripChart(ctx, widthPx, heightPx, series, colors, cursorT) {
    ctx.clearRect(0, 0, widthPx, heightPx);
    ctx.fillStyle = '#ffffff';
    ctx.fillRect(0, 0, widthPx, heightPx);
    const all = series.flatMap((s) => s.speed);
    if (!all.length)
        return;
    const tMin = Math.min(...series.map((s) => s.t[0] ?? 0));
    const tMax = Math.max(...series.map((s) => s.t[s.t.length - 1] ?? 1));
    const vMax = Math.max(1, ...all);
    const sx = (t) => ((t - tMin) / Math.max(tMax - tMin, 1e-9)) * widthPx;
    const sy = (v) => heightPx - (v / vMax) * (heightPx - 10) - 5;
    series.forEach((s, k) => {
        ctx.beginPath();
        s.t.forEach((t, i) => {
            const px = sx(t);
            const py = sy(s.speed[i]);
            if (i === 0)
                ctx.moveTo(px, py);
            else
                ctx.lineTo(px, py);
        });
        ctx.strokeStyle = colors[k % colors.length];
        ctx.lineWidth = 1.5;
        ctx.stroke();
    });
    if (cursorT !== null) {
        ctx.beginPath();
        ctx.moveTo(sx(cursorT), 0);
        ctx.lineTo(sx(cursorT), heightPx);
        ctx.strokeStyle = '#999999';
        ctx.lineWidth = 1;
        ctx.stroke();
    }
    ctx.fillStyle = '#333333';
    ctx.font = '10px sans-serif';
    ctx.fillText(`speed [m/s], max ${vMax.toFixed(1)}`, 4, 10);
}

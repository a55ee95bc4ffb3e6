// Top-down canvas replay of one event: heading-aligned participant
// boxes, playback clock with scrub and speed control, and (after the
// reveal) overlays for predicted and hypothetical trajectories.
import { boundsOfPoints, boxScreenCorners, fitCamera, worldToScreen, } from './transform.js';
const CLASS_COLORS = {
    car: '#4a78b5',
    truck_bus: '#38618c',
    van: '#5587c9',
    motorcycle: '#b08a3e',
    bicycle: '#3e9e63',
    pedestrian: '#c24f4f',
    other: '#888888',
};
export class ReplayScene {
    payload;
    /** Playback position in seconds from the first payload frame. */
    time = 0;
    speed = 1.0;
    playing = false;
    overlays = null;
    lastTick = null;
    constructor(payload) {
        this.payload = payload;
    }
    get duration() {
        return Math.max(0, this.payload.frames.length - 1) / this.payload.fps;
    }
    /** Seconds from the payload start to the activation frame. */
    get activationOffset() {
        const first = this.payload.frames.length ? this.payload.frames[0].frame : 0;
        return (this.payload.t0_frame - first) / this.payload.fps;
    }
    frameIndexAt(t) {
        const idx = Math.round(t * this.payload.fps);
        return Math.min(Math.max(idx, 0), this.payload.frames.length - 1);
    }
    /** Advance the clock from a requestAnimationFrame timestamp (ms). */
    tick(nowMs) {
        if (!this.playing) {
            this.lastTick = nowMs;
            return;
        }
        if (this.lastTick !== null) {
            this.time += ((nowMs - this.lastTick) / 1000) * this.speed;
            if (this.time > this.duration) {
                this.time = this.duration;
                this.playing = false;
            }
        }
        this.lastTick = nowMs;
    }
    camera(widthPx, heightPx) {
        const points = [];
        for (const frame of this.payload.frames) {
            for (const row of frame.participants) {
                if (row[0] === this.payload.ego_id || row[0] === this.payload.object_id) {
                    points.push([row[1], row[2]]);
                }
            }
        }
        if (this.overlays) {
            for (const poses of [this.overlays.egoPrediction, this.overlays.objPrediction,
                this.overlays.hypotheticalEgo]) {
                for (const p of poses)
                    points.push([p[1], p[2]]);
            }
        }
        const b = boundsOfPoints(points);
        return fitCamera({ minX: b.minX - 5, maxX: b.maxX + 5, minY: b.minY - 5, maxY: b.maxY + 5 }, widthPx, heightPx);
    }
    draw(ctx, widthPx, heightPx) {
        const affine = this.camera(widthPx, heightPx);
        ctx.clearRect(0, 0, widthPx, heightPx);
        ctx.fillStyle = '#fafafa';
        ctx.fillRect(0, 0, widthPx, heightPx);
        if (this.overlays)
            this.drawOverlays(ctx, affine);
        const frame = this.payload.frames[this.frameIndexAt(this.time)];
        if (!frame)
            return;
        for (const [id, x, y, psi, length, width, cls] of frame.participants) {
            const corners = boxScreenCorners(affine, x, y, psi, length, width);
            ctx.beginPath();
            corners.forEach(([sx, sy], i) => (i === 0 ? ctx.moveTo(sx, sy) : ctx.lineTo(sx, sy)));
            ctx.closePath();
            ctx.fillStyle = CLASS_COLORS[cls] ?? CLASS_COLORS.other;
            ctx.globalAlpha = 0.85;
            ctx.fill();
            ctx.globalAlpha = 1.0;
            if (id === this.payload.ego_id || id === this.payload.object_id) {
                ctx.lineWidth = 2.5;
                ctx.strokeStyle = id === this.payload.ego_id ? '#111111' : '#d07000';
                ctx.stroke();
            }
            // heading tick from center to the front edge midpoint
            const [cx0, cy0] = worldToScreen(affine, x, y);
            const [fx, fy] = worldToScreen(affine, x + (length / 2) * Math.cos(psi), y + (length / 2) * Math.sin(psi));
            ctx.beginPath();
            ctx.moveTo(cx0, cy0);
            ctx.lineTo(fx, fy);
            ctx.lineWidth = 1;
            ctx.strokeStyle = '#ffffff';
            ctx.stroke();
        }
    }
    drawPolyline(ctx, affine, poses, style, dash) {
        if (!poses.length)
            return;
        ctx.beginPath();
        poses.forEach((p, i) => {
            const [sx, sy] = worldToScreen(affine, p[1], p[2]);
            if (i === 0)
                ctx.moveTo(sx, sy);
            else
                ctx.lineTo(sx, sy);
        });
        ctx.setLineDash(dash);
        ctx.lineWidth = 2;
        ctx.strokeStyle = style;
        ctx.stroke();
        ctx.setLineDash([]);
    }
    drawOverlays(ctx, affine) {
        if (!this.overlays)
            return;
        this.drawPolyline(ctx, affine, this.overlays.egoPrediction, '#1141aa', [6, 4]);
        this.drawPolyline(ctx, affine, this.overlays.objPrediction, '#d07000', [6, 4]);
        this.drawPolyline(ctx, affine, this.overlays.hypotheticalEgo, '#a011aa', [2, 3]);
    }
}
export function overlaysFromReveal(reveal) {
    return {
        egoPrediction: reveal.prediction.ego_poses,
        objPrediction: reveal.prediction.obj_poses,
        hypotheticalEgo: reveal.pseudo.hyp_ego_poses,
    };
}

/**
 * Built-in artwork: six book-shaped mate sprites (one hue per voice) and a
 * small set of human avatars. All inline SVG, no asset pipeline. Which human
 * avatar a family prefers is cosmetic only, so it lives in localStorage and
 * never touches the server.
 */

const MATE_HUES = [0, 205, 36, 140, 268, 24, 320]; // index 0 unused; voices are 1..6

export function mateSprite(voice: number): string {
  const hue = MATE_HUES[voice] ?? 0;
  const cover = `hsl(${hue}, 65%, 55%)`;
  const spine = `hsl(${hue}, 65%, 38%)`;
  return `
<svg viewBox="0 0 48 48" role="img" aria-label="Mate ${voice}">
  <g class="mate-sprite">
    <path d="M8 10 Q24 4 24 10 L24 40 Q24 34 8 40 Z" fill="${cover}" stroke="${spine}" stroke-width="2"/>
    <path d="M40 10 Q24 4 24 10 L24 40 Q24 34 40 40 Z" fill="${cover}" stroke="${spine}" stroke-width="2"/>
    <circle cx="17" cy="20" r="2.2" fill="#1c1c28"/>
    <circle cx="31" cy="20" r="2.2" fill="#1c1c28"/>
    <path d="M19 27 Q24 31 29 27" fill="none" stroke="#1c1c28" stroke-width="2" stroke-linecap="round"/>
    <text x="24" y="46" text-anchor="middle" font-size="7" fill="${spine}">${voice}</text>
  </g>
</svg>`;
}

const SKIN_TONES = ["#f3c6a5", "#d9a066", "#8d5a2b"];

function personSvg(label: string, skin: string, shirt: string, child: boolean): string {
  const headR = child ? 9 : 8;
  const shoulders = child ? "M12 44 Q24 30 36 44" : "M10 44 Q24 28 38 44";
  return `
<svg viewBox="0 0 48 48" role="img" aria-label="${label}">
  <circle cx="24" cy="18" r="${headR}" fill="${skin}"/>
  <path d="${shoulders}" fill="${shirt}"/>
  <circle cx="${24 - headR / 2.2}" cy="17" r="1.4" fill="#1c1c28"/>
  <circle cx="${24 + headR / 2.2}" cy="17" r="1.4" fill="#1c1c28"/>
  <path d="M${24 - 3} ${20 + (child ? 2 : 1)} Q24 ${24 + (child ? 1 : 0)} ${24 + 3} ${20 + (child ? 2 : 1)}" fill="none" stroke="#1c1c28" stroke-width="1.5" stroke-linecap="round"/>
</svg>`;
}

const SHIRTS = { adult: ["#3f6ea5", "#5a8f68"], child: ["#d9684a", "#b06ab3"] };

function variants(kind: "adult" | "child"): string[] {
  const out: string[] = [];
  for (const shirt of SHIRTS[kind]) {
    for (const [i, skin] of SKIN_TONES.entries()) {
      out.push(personSvg(`${kind} avatar ${out.length + 1} (tone ${i + 1})`, skin, shirt, kind === "child"));
    }
  }
  return out;
}

export const ADULT_AVATARS = variants("adult");
export const CHILD_AVATARS = variants("child");

const STORE_KEY = (kind: "adult" | "child") => `storycast.avatar.${kind}`;

export function avatarChoice(kind: "adult" | "child"): number {
  const set = kind === "adult" ? ADULT_AVATARS : CHILD_AVATARS;
  try {
    const raw = localStorage.getItem(STORE_KEY(kind));
    const n = raw === null ? 0 : parseInt(raw, 10);
    return Number.isInteger(n) && n >= 0 && n < set.length ? n : 0;
  } catch {
    return 0;
  }
}

export function setAvatarChoice(kind: "adult" | "child", index: number): void {
  try {
    localStorage.setItem(STORE_KEY(kind), String(index));
  } catch {
    // storage may be unavailable; the choice just won't stick
  }
}

export function humanAvatar(kind: "adult" | "child"): string {
  const set = kind === "adult" ? ADULT_AVATARS : CHILD_AVATARS;
  return set[avatarChoice(kind)];
}

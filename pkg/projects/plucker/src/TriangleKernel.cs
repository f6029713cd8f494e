public struct Vec3
{
    public double X, Y, Z;
}

public static class TriangleKernel
{
    // Returns true and fills (t, a1, a2, a3) when the ray hits the triangle.
    public static bool Intersect(Vec3 o, Vec3 dir, Vec3 p1, Vec3 p2, Vec3 p3,
                                 out double t, out double a1, out double a2, out double a3)
    {
        double d1, d2, d3;
        #region GMac : PluckerRayTriangle
        //GMac.Bind("pr", "Vec3", "o");
        //GMac.Bind("vr", "Vec3", "dir");
        //GMac.Bind("v1", "Vec3", "p1");
        //GMac.Bind("v2", "Vec3", "p2");
        //GMac.Bind("v3", "Vec3", "p3");
        //GMac.Bind("d1.1", "<d1>");
        //GMac.Bind("d2.1", "<d2>");
        //GMac.Bind("d3.1", "<d3>");
        //GMac.Bind("a1.1", "<a1>");
        //GMac.Bind("a2.1", "<a2>");
        //GMac.Bind("a3.1", "<a3>");
        //GMac.Bind("t.1", "<t>");
        #endregion
        bool sameSign = (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
        return sameSign && t >= 0;
    }
}
